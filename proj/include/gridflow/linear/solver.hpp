#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gridflow/linear/bicgstab.hpp"
#include "gridflow/linear/config.hpp"
#include "gridflow/linear/lu.hpp"
#include "gridflow/sparse/matrix.hpp"
#include "gridflow/sparse/permutation.hpp"

namespace gridflow {

/// Solver front end used by both Newton loops. Direct solves factorize with an
/// AMD column ordering; Krylov solves run BiCGSTAB on the RCM-permuted system
/// (rows and columns permuted alike) and return x in the caller's ordering.
///
/// Orderings depend only on the sparsity pattern, so they are cached and
/// reused while successive matrices share a pattern (every Newton iteration).
class LinearSolver {
 public:
  explicit LinearSolver(LinearSolverConfig cfg = {}, std::size_t thread_count = 1);

  const LinearSolverConfig& config() const noexcept { return cfg_; }
  std::size_t thread_count() const noexcept { return threads_; }

  /// Dispatches on config().kind. Krylov non-convergence throws
  /// KrylovNotConvergedError; breakdown throws KrylovBreakdownError.
  std::vector<double> solve(const RealMatrix& a, std::span<const double> b);
  std::vector<double> solve_direct(const RealMatrix& a, std::span<const double> b);
  std::vector<double> solve_krylov(const RealMatrix& a, std::span<const double> b);

  /// Iterations of the most recent Krylov solve.
  std::size_t last_krylov_iterations() const noexcept { return last_krylov_iterations_; }

 private:
  const Permutation& fill_ordering(const RealMatrix& a);
  const Permutation& locality_ordering(const RealMatrix& a);

  LinearSolverConfig cfg_;
  std::size_t threads_;
  std::optional<SparsityPattern> amd_pattern_;
  Permutation amd_perm_;
  std::optional<SparsityPattern> rcm_pattern_;
  Permutation rcm_perm_;
  std::size_t last_krylov_iterations_ = 0;
};

/// One-shot form of LinearSolver::solve.
std::vector<double> solve_linear(const RealMatrix& a, std::span<const double> b, const LinearSolverConfig& cfg,
                                 std::size_t thread_count = 1);

}  // namespace gridflow
