#include "gridflow/linear/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gridflow/sparse/ordering.hpp"

namespace gridflow {

void LinearSolverConfig::validate() const {
  if (!(tol > 0.0) || !std::isfinite(tol)) throw std::invalid_argument("linear solver: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("linear solver: max_iter must be at least 1");
  if (!(pivot_threshold > 0.0 && pivot_threshold <= 1.0)) {
    throw std::invalid_argument("linear solver: pivot_threshold must lie in (0, 1]");
  }
}

std::string_view to_string(SolverKind kind) noexcept {
  return kind == SolverKind::direct ? "direct" : "krylov";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "direct") return SolverKind::direct;
  if (name == "krylov") return SolverKind::krylov;
  throw std::invalid_argument("unknown solver kind '" + std::string(name) + "' (expected direct or krylov)");
}

LinearSolver::LinearSolver(LinearSolverConfig cfg, std::size_t thread_count) : cfg_(cfg), threads_(thread_count) {
  cfg_.validate();
  if (threads_ == 0) throw std::invalid_argument("linear solver: thread_count must be at least 1");
}

const Permutation& LinearSolver::fill_ordering(const RealMatrix& a) {
  SparsityPattern pattern = a.pattern();
  if (!amd_pattern_ || *amd_pattern_ != pattern) {
    amd_perm_ = amd_order(pattern);
    amd_pattern_ = std::move(pattern);
  }
  return amd_perm_;
}

const Permutation& LinearSolver::locality_ordering(const RealMatrix& a) {
  SparsityPattern pattern = a.pattern();
  if (!rcm_pattern_ || *rcm_pattern_ != pattern) {
    rcm_perm_ = rcm_order(pattern);
    rcm_pattern_ = std::move(pattern);
  }
  return rcm_perm_;
}

std::vector<double> LinearSolver::solve(const RealMatrix& a, std::span<const double> b) {
  return cfg_.kind == SolverKind::direct ? solve_direct(a, b) : solve_krylov(a, b);
}

std::vector<double> LinearSolver::solve_direct(const RealMatrix& a, std::span<const double> b) {
  if (a.rows() != a.cols()) throw DimensionError("solve_linear: matrix must be square");
  if (b.size() != a.rows()) throw DimensionError("solve_linear: right-hand side length does not match");
  const LUFactors f = lu_factorize(a, fill_ordering(a), cfg_.pivot_threshold);
  return lu_solve(f, b);
}

std::vector<double> LinearSolver::solve_krylov(const RealMatrix& a, std::span<const double> b) {
  if (a.rows() != a.cols()) throw DimensionError("solve_linear: matrix must be square");
  if (b.size() != a.rows()) throw DimensionError("solve_linear: right-hand side length does not match");
  const Permutation& p = locality_ordering(a);
  const RealMatrix pa = permute(a, p, p);
  const std::vector<double> pb = p.apply(b);
  const KrylovResult res = bicgstab(pa, pb, cfg_, threads_);
  last_krylov_iterations_ = res.iterations;
  if (!res.converged) {
    double b_norm = 0.0;
    for (double v : b) b_norm += v * v;
    b_norm = std::sqrt(b_norm);
    const double rel = b_norm > 0.0 ? res.residual_norm / b_norm : res.residual_norm;
    throw KrylovNotConvergedError(res.iterations, rel,
                                  "bicgstab did not converge in " + std::to_string(res.iterations) +
                                      " iterations (relative residual " + std::to_string(rel) + ")");
  }
  return p.unapply(std::span<const double>(res.x));
}

std::vector<double> solve_linear(const RealMatrix& a, std::span<const double> b, const LinearSolverConfig& cfg,
                                 std::size_t thread_count) {
  LinearSolver solver(cfg, thread_count);
  return solver.solve(a, b);
}

}  // namespace gridflow
