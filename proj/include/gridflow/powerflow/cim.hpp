#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "gridflow/linear/config.hpp"
#include "gridflow/powerflow/timing.hpp"
#include "gridflow/sparse/matrix.hpp"
#include "gridflow/threephase/network.hpp"

namespace gridflow {

/// Voltages below this magnitude (p.u.) mean the iteration is diverging.
inline constexpr double kNearZeroVoltage = 1e-6;

/// conj(S_sp / V) with S_sp = -(P_l + j Q_l) from the bus's ZIP load.
/// Throws NearZeroVoltageError when |v| < kNearZeroVoltage.
std::complex<double> specified_current(const Bus3& bus, Phase phase, std::complex<double> v);

/// I = Y V over the compact phase-nodes.
std::vector<std::complex<double>> calculated_current(const ComplexMatrix& ybus3, const VoltageState3& state,
                                                     std::size_t thread_count = 1);

/// Real stacking of the unknowns and equations. Source-bus phase-nodes are
/// excluded. Each remaining bus owns a block of 2m rows (m present phases):
/// current equations imaginary parts first, then real parts; voltage
/// unknowns real parts first, then imaginary parts.
class CimLayout {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  CimLayout() = default;
  CimLayout(const ThreePhaseNetwork& net, const PhaseIndexer& indexer);

  std::size_t size() const noexcept { return size_; }
  /// Row of Im(dI) at node k; equals the column of Re(dV). npos at the source.
  std::size_t first(std::size_t node) const noexcept { return first_[node]; }
  /// Row of Re(dI) at node k; equals the column of Im(dV).
  std::size_t second(std::size_t node) const noexcept { return second_[node]; }
  bool is_free(std::size_t node) const noexcept { return first_[node] != npos; }

 private:
  std::vector<std::size_t> first_;
  std::vector<std::size_t> second_;
  std::size_t size_ = 0;
};

/// I_sp - I_calc at every non-source phase-node, stacked per CimLayout.
std::vector<double> current_mismatch(const ThreePhaseNetwork& net, const PhaseIndexer& indexer, const CimLayout& layout,
                                     const ComplexMatrix& ybus3, const VoltageState3& state,
                                     std::size_t thread_count = 1);
std::vector<double> current_mismatch(const ThreePhaseNetwork& net, const VoltageState3& state);

/// Partial derivatives of the bus's specified currents with respect to its
/// own voltages, indexed [phase][phase] (zero off the diagonal for wye loads):
///   a = dIm/dRe(V), b = dIm/dIm(V), c = dRe/dRe(V), d = dRe/dIm(V).
struct AdjustingBlocks {
  std::array<std::array<double, 3>, 3> a{};
  std::array<std::array<double, 3>, 3> b{};
  std::array<std::array<double, 3>, 3> c{};
  std::array<std::array<double, 3>, 3> d{};
};

/// `v` is indexed by Phase; entries of absent phases are ignored.
AdjustingBlocks adjusting_blocks(const Bus3& bus, const std::array<std::complex<double>, 3>& v);

/// Jacobian of I_calc(V) - I_sp(V) in the CimLayout stacking: every Y entry
/// G + jB becomes [[B, G], [G, -B]] and the diagonal blocks subtract the
/// adjusting blocks. Solving J dV = I_sp - I_calc is a Newton step.
RealMatrix build_cim_jacobian(const ThreePhaseNetwork& net, const PhaseIndexer& indexer, const CimLayout& layout,
                              const ComplexMatrix& ybus3, const VoltageState3& state);
RealMatrix build_cim_jacobian(const ThreePhaseNetwork& net, const VoltageState3& state);

struct CimOptions {
  double tol_v = 1e-8;  // p.u., largest stacked voltage update
  std::size_t max_iter = 50;
  LinearSolverConfig linear{};
  bool fallback_to_direct = true;

  void validate() const;
};

struct ThreePhaseSolution {
  PhaseIndexer indexer;
  VoltageState3 state;
  std::size_t iterations = 0;
  /// Stacked current mismatch infinity-norm before each step, then at the
  /// returned state.
  std::vector<double> mismatch_history;
  std::vector<double> update_history;
  bool converged = false;
  SolveTimings timings;
  std::size_t krylov_fallbacks = 0;
  std::size_t krylov_iterations = 0;

  double final_mismatch() const noexcept { return mismatch_history.empty() ? 0.0 : mismatch_history.back(); }
};

/// Current-injection Newton from the rotated source-voltage flat start.
/// Stops when the largest stacked voltage update is within tol_v. Running
/// out of iterations gives converged = false; a singular Jacobian throws
/// SingularJacobianError and a collapsing voltage NearZeroVoltageError.
ThreePhaseSolution solve_cim(const ThreePhaseNetwork& net, const CimOptions& opts = {}, std::size_t thread_count = 1);

}  // namespace gridflow
