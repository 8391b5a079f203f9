#pragma once

#include <cstddef>
#include <string_view>

namespace gridflow {

enum class SolverKind { direct, krylov };
enum class Preconditioner { none, jacobi };

/// Inner linear solver settings shared by both Newton drivers.
struct LinearSolverConfig {
  SolverKind kind = SolverKind::direct;
  /// Krylov stop: ||b - A x||_2 <= tol * ||b||_2.
  double tol = 1e-10;
  std::size_t max_iter = 1000;
  Preconditioner preconditioner = Preconditioner::jacobi;
  /// LU accepts the diagonal pivot when |a_diag| >= threshold * max |a_col|;
  /// 1.0 is plain partial pivoting.
  double pivot_threshold = 1.0;

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

std::string_view to_string(SolverKind kind) noexcept;
/// "direct" or "krylov"; throws std::invalid_argument otherwise.
SolverKind parse_solver_kind(std::string_view name);

}  // namespace gridflow
