#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridflow/sparse/matrix.hpp"

namespace gridflow {

enum class BusKind { slack, pv, pq };

std::string_view to_string(BusKind kind) noexcept;
/// "slack", "pv" or "pq"; throws std::invalid_argument otherwise.
BusKind parse_bus_kind(std::string_view name);

/// All electrical quantities are per-unit on the network's base_mva.
struct Bus {
  std::size_t id = 0;
  BusKind kind = BusKind::pq;
  double p_load = 0.0;
  double q_load = 0.0;
  double p_gen = 0.0;
  /// Voltage magnitude held at slack and PV buses.
  double v_setpoint = 1.0;
  double shunt_g = 0.0;
  double shunt_b = 0.0;

  friend bool operator==(const Bus&, const Bus&) = default;
};

/// Pi-model line; endpoints are bus ids. b_charging is the total line
/// charging, half of which sits at each end.
struct Branch {
  std::size_t from = 0;
  std::size_t to = 0;
  double r = 0.0;
  double x = 0.0;
  double b_charging = 0.0;

  friend bool operator==(const Branch&, const Branch&) = default;
};

struct SinglePhaseNetwork {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  double base_mva = 100.0;

  std::size_t size() const noexcept { return buses.size(); }

  /// Bus id -> position in `buses`. Throws NetworkError on duplicate ids.
  std::unordered_map<std::size_t, std::size_t> positions() const;

  friend bool operator==(const SinglePhaseNetwork&, const SinglePhaseNetwork&) = default;
};

/// Polar voltages indexed by bus position.
struct VoltageState {
  std::vector<double> magnitude;
  std::vector<double> angle;  // radians

  std::size_t size() const noexcept { return magnitude.size(); }
  std::complex<double> phasor(std::size_t i) const { return std::polar(magnitude[i], angle[i]); }
  std::vector<std::complex<double>> phasors() const;
};

/// Slack and PV magnitudes at their setpoints, PQ magnitudes at 1, all
/// angles 0.
VoltageState flat_start(const SinglePhaseNetwork& net);

/// Y-bus over bus positions: series admittance 1/(r + jx) between the
/// endpoints, half the charging and the bus shunts on the diagonal.
/// Throws NetworkError for unknown endpoints or a zero-impedance branch.
ComplexMatrix build_ybus(const SinglePhaseNetwork& net);

enum class ViolationKind {
  slack_count,
  duplicate_bus,
  dangling_endpoint,
  self_loop,
  zero_impedance,
  disconnected,
  bad_setpoint,
  non_finite,
  phase_mismatch,
  bad_source,
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  /// JSON-path style pointer into the case, e.g. "network.branches[3].to".
  std::string location;
  std::string message;
};

/// Empty means valid.
struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::size_t count(ViolationKind kind) const noexcept;
  /// One violation per line.
  std::string summary() const;
};

ValidationReport validate_network(const SinglePhaseNetwork& net);

}  // namespace gridflow
