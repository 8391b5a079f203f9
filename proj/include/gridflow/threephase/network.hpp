#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridflow/grid/network.hpp"
#include "gridflow/sparse/matrix.hpp"

namespace gridflow {

enum class Phase : unsigned char { a = 0, b = 1, c = 2 };

inline constexpr std::array<Phase, 3> kAllPhases{Phase::a, Phase::b, Phase::c};

char phase_letter(Phase p) noexcept;
/// Nominal angle of a phase: 0, -2pi/3, +2pi/3 for a, b, c.
double nominal_angle(Phase p) noexcept;

/// Subset of {a, b, c}.
class PhaseSet {
 public:
  constexpr PhaseSet() = default;
  static constexpr PhaseSet all() { return PhaseSet(0b111); }
  /// Letters from "abc" in any order, no repeats; throws std::invalid_argument.
  static PhaseSet parse(std::string_view letters);

  constexpr bool has(Phase p) const noexcept { return (mask_ >> static_cast<unsigned>(p)) & 1u; }
  constexpr void add(Phase p) noexcept { mask_ |= 1u << static_cast<unsigned>(p); }
  constexpr std::size_t size() const noexcept { return (mask_ & 1u) + ((mask_ >> 1) & 1u) + ((mask_ >> 2) & 1u); }
  constexpr bool empty() const noexcept { return mask_ == 0; }
  constexpr bool subset_of(PhaseSet other) const noexcept { return (mask_ & ~other.mask_) == 0; }
  constexpr unsigned mask() const noexcept { return mask_; }
  /// Present phases in a, b, c order.
  std::vector<Phase> phases() const;
  std::string letters() const;

  friend constexpr bool operator==(PhaseSet, PhaseSet) = default;

 private:
  constexpr explicit PhaseSet(unsigned mask) : mask_(mask) {}
  unsigned mask_ = 0;
};

/// Per-phase ZIP load in per-unit: constant power, current and impedance
/// shares of the active and reactive demand at nominal voltage.
struct ZipLoad {
  double p_constant = 0.0;
  double p_current = 0.0;
  double p_impedance = 0.0;
  double q_constant = 0.0;
  double q_current = 0.0;
  double q_impedance = 0.0;

  bool is_zero() const noexcept;
  friend bool operator==(const ZipLoad&, const ZipLoad&) = default;
};

struct Bus3 {
  std::size_t id = 0;
  PhaseSet phases = PhaseSet::all();
  /// Indexed by Phase; entries for absent phases stay zero.
  std::array<ZipLoad, 3> loads{};

  const ZipLoad& load(Phase p) const { return loads[static_cast<std::size_t>(p)]; }
  friend bool operator==(const Bus3&, const Bus3&) = default;
};

using Block3 = std::array<std::array<std::complex<double>, 3>, 3>;

struct Branch3 {
  std::size_t from = 0;
  std::size_t to = 0;
  PhaseSet phases = PhaseSet::all();
  /// Series admittance, indexed [phase][phase]; rows and columns of absent
  /// phases are ignored.
  Block3 y_series{};
  std::optional<Block3> y_shunt_from;
  std::optional<Block3> y_shunt_to;

  friend bool operator==(const Branch3&, const Branch3&) = default;
};

struct ThreePhaseNetwork {
  std::vector<Bus3> buses;
  std::vector<Branch3> branches;
  /// Id of the substation bus whose voltages are held fixed.
  std::size_t source_bus = 0;
  double source_vm = 1.0;
  double source_angle = 0.0;  // rad, phase a
  double base_mva = 1.0;

  std::unordered_map<std::size_t, std::size_t> positions() const;
  std::size_t source_position() const;

  friend bool operator==(const ThreePhaseNetwork&, const ThreePhaseNetwork&) = default;
};

/// Flat index of a phase-node with buses numbered from 1: 3(i - 1) + k with
/// k = 1, 2, 3 for phases a, b, c.
std::size_t phase_index(std::size_t bus_number, Phase phase);
/// Same, but throws NetworkError if `phase` is absent at `bus`.
std::size_t phase_index(const Bus3& bus, std::size_t bus_number, Phase phase);

/// Compact 0-based numbering of the present phase-nodes, bus by bus in
/// network order and a, b, c within a bus.
class PhaseIndexer {
 public:
  struct Node {
    std::size_t bus;  // position in ThreePhaseNetwork::buses
    Phase phase;
  };

  PhaseIndexer() = default;
  explicit PhaseIndexer(const ThreePhaseNetwork& net);

  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(std::size_t k) const { return nodes_[k]; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  /// Compact index of (bus position, phase); throws NetworkError if absent.
  std::size_t index(std::size_t bus, Phase phase) const;
  bool has(std::size_t bus, Phase phase) const noexcept;
  /// The 1-based flat index used in reports: 3(bus + 1 - 1) + k.
  std::size_t report_index(std::size_t k) const { return phase_index(nodes_[k].bus + 1, nodes_[k].phase); }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<Node> nodes_;
  std::vector<std::array<std::size_t, 3>> lookup_;
};

/// Complex voltage per compact phase-node.
using VoltageState3 = std::vector<std::complex<double>>;

/// Series blocks between endpoints and shunt blocks on the diagonals, over
/// the compact phase-node numbering. Parallel branches add up.
ComplexMatrix build_ybus3(const ThreePhaseNetwork& net, const PhaseIndexer& indexer);
ComplexMatrix build_ybus3(const ThreePhaseNetwork& net);

struct LoadPower {
  double p = 0.0;
  double q = 0.0;
};

/// P_l = P_P + P_I vm + P_Z vm^2, likewise for Q.
LoadPower zip_load(const ZipLoad& load, double vm) noexcept;
LoadPower zip_load(const Bus3& bus, Phase phase, double vm);

/// Every present phase-node at the source magnitude, rotated to its nominal
/// phase angle.
VoltageState3 flat_start(const ThreePhaseNetwork& net, const PhaseIndexer& indexer);

ValidationReport validate_network(const ThreePhaseNetwork& net);

}  // namespace gridflow
