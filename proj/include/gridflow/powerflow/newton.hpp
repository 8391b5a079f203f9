#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "gridflow/grid/network.hpp"
#include "gridflow/linear/config.hpp"
#include "gridflow/powerflow/timing.hpp"
#include "gridflow/sparse/matrix.hpp"

namespace gridflow {

/// Injected power per bus position.
struct BusPowers {
  std::vector<double> p;
  std::vector<double> q;
};

/// S_i = V_i * conj(sum_j Y_ij V_j).
BusPowers calc_pq(const ComplexMatrix& ybus, const VoltageState& state, std::size_t thread_count = 1);

/// Row layout of the polar Newton system: one angle unknown per non-slack
/// bus, then one magnitude unknown per PQ bus, both in bus order.
struct EquationMap {
  std::vector<std::size_t> angle_buses;      // row/column k -> bus position
  std::vector<std::size_t> magnitude_buses;  // row/column angle_buses.size() + k -> bus position
  std::vector<std::size_t> angle_row;        // bus position -> row, or npos
  std::vector<std::size_t> magnitude_row;    // bus position -> row, or npos

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit EquationMap(const SinglePhaseNetwork& net);
  std::size_t size() const noexcept { return angle_buses.size() + magnitude_buses.size(); }
};

struct MismatchVector {
  std::vector<double> dp;  // one per entry of EquationMap::angle_buses
  std::vector<double> dq;  // one per entry of EquationMap::magnitude_buses

  /// [dp; dq], the right-hand side of the Newton system.
  std::vector<double> stacked() const;
  double inf_norm() const noexcept;
};

/// Specified minus calculated injections: dP for PV and PQ buses, dQ for PQ
/// buses only.
MismatchVector power_mismatch(const SinglePhaseNetwork& net, const VoltageState& state);
MismatchVector power_mismatch(const SinglePhaseNetwork& net, const ComplexMatrix& ybus, const EquationMap& map,
                              const VoltageState& state, std::size_t thread_count = 1);

/// Polar Jacobian d(P, Q)/d(angle, |V|) restricted by bus role, laid out as
/// [[dP/dangle, dP/d|V|], [dQ/dangle, dQ/d|V|]] over EquationMap.
RealMatrix build_jacobian(const SinglePhaseNetwork& net, const VoltageState& state);
RealMatrix build_jacobian(const ComplexMatrix& ybus, const EquationMap& map, const VoltageState& state,
                          std::size_t thread_count = 1);

struct NewtonOptions {
  double tol_angle = 1e-8;  // rad
  double tol_vm = 1e-8;     // p.u.
  std::size_t max_iter = 30;
  LinearSolverConfig linear{};
  bool flat_start = true;
  /// Retry a step with the direct solver when the Krylov solve fails.
  bool fallback_to_direct = true;

  void validate() const;
};

struct PowerFlowSolution {
  VoltageState state;
  std::size_t iterations = 0;
  /// Mismatch infinity-norm before each Newton step, plus the value at the
  /// returned state as the last entry.
  std::vector<double> mismatch_history;
  /// Infinity-norm of each Newton update.
  std::vector<double> update_history;
  bool converged = false;
  SolveTimings timings;
  std::size_t krylov_fallbacks = 0;
  std::size_t krylov_iterations = 0;

  double final_mismatch() const noexcept { return mismatch_history.empty() ? 0.0 : mismatch_history.back(); }
};

/// Polar Newton-Raphson. Stops when every angle update is within tol_angle
/// and every magnitude update within tol_vm. Running out of iterations gives
/// converged = false; a singular Jacobian throws SingularJacobianError.
/// `initial` is used when opts.flat_start is false.
PowerFlowSolution solve_nr(const SinglePhaseNetwork& net, const NewtonOptions& opts = {},
                           std::size_t thread_count = 1, const VoltageState* initial = nullptr);

}  // namespace gridflow
