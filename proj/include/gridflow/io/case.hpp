#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "gridflow/errors.hpp"
#include "gridflow/grid/network.hpp"
#include "gridflow/synth/synth.hpp"
#include "gridflow/threephase/network.hpp"

namespace gridflow {

inline constexpr std::string_view kCaseFormatVersion = "1.0";

enum class CaseKind { single_phase, three_phase };

std::string_view to_string(CaseKind kind) noexcept;

/// How a synthesized case was produced.
struct SynthRecord {
  std::string base;  // name of the base case
  SynthSpec spec;

  friend bool operator==(const SynthRecord&, const SynthRecord&) = default;
};

struct CaseMetadata {
  std::string name;
  std::string source;
  std::optional<SynthRecord> synth;

  friend bool operator==(const CaseMetadata&, const CaseMetadata&) = default;
};

struct CaseFile {
  std::string format_version{kCaseFormatVersion};
  CaseMetadata metadata;
  std::variant<SinglePhaseNetwork, ThreePhaseNetwork> network;

  CaseKind kind() const noexcept {
    return std::holds_alternative<SinglePhaseNetwork>(network) ? CaseKind::single_phase : CaseKind::three_phase;
  }
  std::size_t bus_count() const noexcept;

  friend bool operator==(const CaseFile&, const CaseFile&) = default;
};

/// Raised by parse_case. `location` is "line L, column C" for syntax errors
/// and a JSON path such as "network.buses[3].type" otherwise.
class CaseError : public Error {
 public:
  enum class Kind { syntax, schema, semantic };

  CaseError(Kind kind, std::string location, const std::string& message);

  Kind kind() const noexcept { return kind_; }
  const std::string& location() const noexcept { return location_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Kind kind_;
  std::string location_;
  std::string detail_;
};

std::string_view to_string(CaseError::Kind kind) noexcept;

/// Strict reader: unknown keys, missing required keys, wrong types and
/// non-finite numbers are schema errors; network validation failures are
/// semantic errors located at the first offending element.
CaseFile parse_case(std::string_view text);

/// Canonical JSON: sorted keys, shortest round-trip numbers, two-space
/// indentation, trailing newline.
std::string write_case(const CaseFile& c);

/// Reads and parses a file; I/O failures are reported as syntax errors.
CaseFile load_case(const std::string& path);

/// Warm start for a synthesized transmission case, rebuilt from the base case
/// named in its synthesis record. Throws std::invalid_argument unless both are
/// single-phase, `base` carries that name, and the bus counts agree.
VoltageState replicated_start(const CaseFile& synthesized, const CaseFile& base);

}  // namespace gridflow
