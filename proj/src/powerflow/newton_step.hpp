#pragma once

#include <string>
#include <vector>

#include "gridflow/errors.hpp"
#include "gridflow/linear/solver.hpp"

namespace gridflow::detail {

/// Solves J dx = rhs for one Newton iteration. Krylov failures fall back to
/// the direct solver when allowed; singular matrices are rethrown with the
/// iteration number attached.
inline std::vector<double> newton_step(LinearSolver& solver, const RealMatrix& j, const std::vector<double>& rhs,
                                       bool fallback, std::size_t iteration, std::size_t& fallbacks,
                                       std::size_t& krylov_iterations) {
  const auto singular = [&](const SingularMatrixError& e) {
    return SingularJacobianError(iteration, e.column(),
                                 "singular Jacobian at Newton iteration " + std::to_string(iteration) + ": " + e.what());
  };
  const bool krylov = solver.config().kind == SolverKind::krylov;
  try {
    std::vector<double> dx = solver.solve(j, rhs);
    if (krylov) krylov_iterations += solver.last_krylov_iterations();
    return dx;
  } catch (const SingularMatrixError& e) {
    throw singular(e);
  } catch (const KrylovNotConvergedError&) {
    if (!fallback) throw;
  } catch (const KrylovBreakdownError&) {
    if (!fallback) throw;
  }
  krylov_iterations += solver.last_krylov_iterations();
  ++fallbacks;
  try {
    return solver.solve_direct(j, rhs);
  } catch (const SingularMatrixError& e) {
    throw singular(e);
  }
}

}  // namespace gridflow::detail
