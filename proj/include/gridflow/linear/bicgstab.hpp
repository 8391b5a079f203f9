#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gridflow/linear/config.hpp"
#include "gridflow/sparse/matrix.hpp"

namespace gridflow {

struct KrylovResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  /// ||b - A x||_2 of the returned x (recomputed, not the recurrence value).
  double residual_norm = 0.0;
  bool converged = false;
};

/// Preconditioned BiCGSTAB. Every kernel (SpMV, axpy-style updates, dot
/// products, Jacobi scaling) runs over `thread_count` contiguous blocks; dot
/// products reduce their per-block sums in block order, so the result is
/// bit-reproducible for a fixed thread count.
///
/// Starts from `x0` when given, else from zero. Throws KrylovBreakdownError
/// when rho, (r~, v) or omega vanish (|.| < 1e-30 on the system scaled to
/// ||b|| = 1). Running out of iterations is reported through
/// `converged = false`, not thrown.
KrylovResult bicgstab(const RealMatrix& a, std::span<const double> b, const LinearSolverConfig& cfg,
                      std::size_t thread_count = 1, std::span<const double> x0 = {});

/// Deterministic blocked dot product, exposed for the kernels' tests.
double parallel_dot(std::span<const double> x, std::span<const double> y, std::size_t thread_count);

}  // namespace gridflow
