#include "gridflow/linear/bicgstab.hpp"

#include <cmath>
#include <string>

#include "gridflow/parallel.hpp"

namespace gridflow {

namespace {

constexpr double kBreakdown = 1e-30;

/// The vector kernels of one solve, all split over the same block layout.
class Kernels {
 public:
  Kernels(const RealMatrix& a, std::size_t threads) : a_(a), threads_(threads), n_(a.rows()) {}

  double dot(const std::vector<double>& x, const std::vector<double>& y) const {
    return parallel_dot(x, y, threads_);
  }
  double norm(const std::vector<double>& x) const { return std::sqrt(dot(x, x)); }

  void matvec(const std::vector<double>& x, std::vector<double>& y) const {
    spmv_into(a_, std::span<const double>(x), std::span<double>(y), threads_);
  }

  /// Applies fn(i) to every index, block-parallel.
  template <typename Fn>
  void each(Fn&& fn) const {
    for_each_block(n_, threads_, [&](BlockRange r, std::size_t) {
      for (std::size_t i = r.begin; i < r.end; ++i) fn(i);
    });
  }

 private:
  const RealMatrix& a_;
  std::size_t threads_;
  std::size_t n_;
};

std::vector<double> jacobi_inverse(const RealMatrix& a, Preconditioner kind) {
  std::vector<double> inv(a.rows(), 1.0);
  if (kind == Preconditioner::none) return inv;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double d = a.coeff(i, i);
    // Rows without a usable diagonal are left unscaled.
    if (d != 0.0 && std::isfinite(d)) inv[i] = 1.0 / d;
  }
  return inv;
}

}  // namespace

double parallel_dot(std::span<const double> x, std::span<const double> y, std::size_t thread_count) {
  if (x.size() != y.size()) throw DimensionError("dot: operand lengths differ");
  const double* xs = x.data();
  const double* ys = y.data();
  return block_reduce<double>(x.size(), thread_count, [=](BlockRange r) {
    double s = 0.0;
    for (std::size_t i = r.begin; i < r.end; ++i) s += xs[i] * ys[i];
    return s;
  });
}

KrylovResult bicgstab(const RealMatrix& a, std::span<const double> b, const LinearSolverConfig& cfg,
                      std::size_t thread_count, std::span<const double> x0) {
  cfg.validate();
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionError("bicgstab: matrix must be square");
  if (b.size() != n) throw DimensionError("bicgstab: right-hand side length does not match the matrix");
  if (!x0.empty() && x0.size() != n) throw DimensionError("bicgstab: initial guess length does not match");
  if (thread_count == 0) throw DimensionError("bicgstab: thread_count must be at least 1");

  const Kernels k(a, thread_count);
  const std::vector<double> b_vec(b.begin(), b.end());
  const double b_norm = k.norm(b_vec);

  KrylovResult result;
  if (b_norm == 0.0) {
    result.x.assign(n, 0.0);
    result.converged = true;
    return result;
  }

  // Work on A x' = b / ||b|| so the breakdown thresholds are scale-free.
  const double scale = 1.0 / b_norm;
  std::vector<double> rhs(n), x(n, 0.0);
  k.each([&](std::size_t i) { rhs[i] = b_vec[i] * scale; });
  if (!x0.empty()) k.each([&](std::size_t i) { x[i] = x0[i] * scale; });

  const std::vector<double> m_inv = jacobi_inverse(a, cfg.preconditioner);
  std::vector<double> r(n), r_hat(n), p(n), p_hat(n), v(n), s(n), s_hat(n), t(n), ax(n);

  const auto true_residual = [&]() {
    k.matvec(x, ax);
    k.each([&](std::size_t i) { r[i] = rhs[i] - ax[i]; });
    return k.norm(r);
  };

  double r_norm = true_residual();
  const double tol = cfg.tol;
  std::size_t iter = 0;
  bool converged = r_norm <= tol;
  bool restart = true;
  double rho_prev = 1.0, alpha = 1.0, omega = 1.0;

  while (!converged && iter < cfg.max_iter) {
    if (restart) {
      r_hat = r;
      restart = false;
      rho_prev = alpha = omega = 1.0;
      k.each([&](std::size_t i) { p[i] = 0.0; v[i] = 0.0; });
    }
    ++iter;
    const double rho = k.dot(r_hat, r);
    if (std::abs(rho) < kBreakdown) {
      throw KrylovBreakdownError("bicgstab: rho vanished at iteration " + std::to_string(iter));
    }
    const double beta = (rho / rho_prev) * (alpha / omega);
    k.each([&](std::size_t i) {
      p[i] = r[i] + beta * (p[i] - omega * v[i]);
      p_hat[i] = m_inv[i] * p[i];
    });
    k.matvec(p_hat, v);
    const double rv = k.dot(r_hat, v);
    if (std::abs(rv) < kBreakdown) {
      throw KrylovBreakdownError("bicgstab: (r~, v) vanished at iteration " + std::to_string(iter));
    }
    alpha = rho / rv;
    k.each([&](std::size_t i) { s[i] = r[i] - alpha * v[i]; });

    if (k.norm(s) <= tol) {
      k.each([&](std::size_t i) { x[i] += alpha * p_hat[i]; });
    } else {
      k.each([&](std::size_t i) { s_hat[i] = m_inv[i] * s[i]; });
      k.matvec(s_hat, t);
      const double tt = k.dot(t, t);
      omega = tt > 0.0 ? k.dot(t, s) / tt : 0.0;
      if (std::abs(omega) < kBreakdown) {
        throw KrylovBreakdownError("bicgstab: omega vanished at iteration " + std::to_string(iter));
      }
      k.each([&](std::size_t i) {
        x[i] += alpha * p_hat[i] + omega * s_hat[i];
        r[i] = s[i] - omega * t[i];
      });
      rho_prev = rho;
      if (k.norm(r) > tol) continue;
    }

    // The recurrence claims convergence; confirm against the true residual
    // and restart from it if the two have drifted apart.
    r_norm = true_residual();
    converged = r_norm <= tol;
    restart = true;
  }
  if (!converged) r_norm = true_residual();

  result.x.resize(n);
  k.each([&](std::size_t i) { result.x[i] = x[i] * b_norm; });
  result.iterations = iter;
  result.residual_norm = r_norm * b_norm;
  result.converged = converged;
  return result;
}

}  // namespace gridflow
