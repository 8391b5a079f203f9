#include "gridflow/powerflow/newton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gridflow/linear/solver.hpp"
#include "newton_step.hpp"

namespace gridflow {

using C = std::complex<double>;

BusPowers calc_pq(const ComplexMatrix& ybus, const VoltageState& state, std::size_t thread_count) {
  if (ybus.rows() != state.size() || ybus.cols() != state.size()) {
    throw DimensionError("calc_pq: Y-bus is " + std::to_string(ybus.rows()) + "x" + std::to_string(ybus.cols()) +
                         " but the state has " + std::to_string(state.size()) + " buses");
  }
  const std::vector<C> v = state.phasors();
  const std::vector<C> current = spmv(ybus, v, thread_count);
  BusPowers out{std::vector<double>(v.size()), std::vector<double>(v.size())};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const C s = v[i] * std::conj(current[i]);
    out.p[i] = s.real();
    out.q[i] = s.imag();
  }
  return out;
}

EquationMap::EquationMap(const SinglePhaseNetwork& net)
    : angle_row(net.size(), npos), magnitude_row(net.size(), npos) {
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net.buses[i].kind != BusKind::slack) {
      angle_row[i] = angle_buses.size();
      angle_buses.push_back(i);
    }
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net.buses[i].kind == BusKind::pq) {
      magnitude_row[i] = angle_buses.size() + magnitude_buses.size();
      magnitude_buses.push_back(i);
    }
  }
}

std::vector<double> MismatchVector::stacked() const {
  std::vector<double> out(dp);
  out.insert(out.end(), dq.begin(), dq.end());
  return out;
}

double MismatchVector::inf_norm() const noexcept {
  double m = 0.0;
  for (double v : dp) m = std::max(m, std::abs(v));
  for (double v : dq) m = std::max(m, std::abs(v));
  return m;
}

MismatchVector power_mismatch(const SinglePhaseNetwork& net, const ComplexMatrix& ybus, const EquationMap& map,
                              const VoltageState& state, std::size_t thread_count) {
  const BusPowers calc = calc_pq(ybus, state, thread_count);
  MismatchVector mm;
  mm.dp.reserve(map.angle_buses.size());
  mm.dq.reserve(map.magnitude_buses.size());
  for (std::size_t i : map.angle_buses) {
    const Bus& b = net.buses[i];
    mm.dp.push_back((b.p_gen - b.p_load) - calc.p[i]);
  }
  for (std::size_t i : map.magnitude_buses) mm.dq.push_back(-net.buses[i].q_load - calc.q[i]);
  return mm;
}

MismatchVector power_mismatch(const SinglePhaseNetwork& net, const VoltageState& state) {
  return power_mismatch(net, build_ybus(net), EquationMap(net), state);
}

RealMatrix build_jacobian(const ComplexMatrix& ybus, const EquationMap& map, const VoltageState& state,
                          std::size_t thread_count) {
  const std::size_t n = state.size();
  if (ybus.rows() != n || map.angle_row.size() != n) throw DimensionError("build_jacobian: sizes do not agree");
  const BusPowers s = calc_pq(ybus, state, thread_count);
  const auto off = ybus.row_offsets();
  const auto col = ybus.col_indices();
  const auto val = ybus.values();
  const auto& vm = state.magnitude;
  const auto& va = state.angle;

  std::vector<Triplet<double>> t;
  t.reserve(4 * ybus.nnz());
  const auto put = [&](std::size_t r, std::size_t c, double v) {
    if (r != EquationMap::npos && c != EquationMap::npos) t.push_back({r, c, v});
  };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pi = map.angle_row[i];
    const std::size_t qi = map.magnitude_row[i];
    if (pi == EquationMap::npos) continue;  // slack
    // Angle derivatives on the diagonal are minus the sum of the row's
    // off-diagonal ones, which stays exact for a bus with no branches.
    double dp_dangle = 0.0, dq_dangle = 0.0;
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
      const std::size_t j = col[k];
      const double g = val[k].real();
      const double b = val[k].imag();
      if (j == i) {
        put(pi, qi, s.p[i] / vm[i] + g * vm[i]);
        put(qi, qi, s.q[i] / vm[i] - b * vm[i]);
        continue;
      }
      const double d = va[i] - va[j];
      const double gs_bc = g * std::sin(d) - b * std::cos(d);
      const double gc_bs = g * std::cos(d) + b * std::sin(d);
      const std::size_t pj = map.angle_row[j];
      const std::size_t qj = map.magnitude_row[j];
      const double dp = vm[i] * vm[j] * gs_bc;
      const double dq = -vm[i] * vm[j] * gc_bs;
      dp_dangle -= dp;
      dq_dangle -= dq;
      put(pi, pj, dp);
      put(pi, qj, vm[i] * gc_bs);
      put(qi, pj, dq);
      put(qi, qj, vm[i] * gs_bc);
    }
    put(pi, pi, dp_dangle);
    put(qi, pi, dq_dangle);
    put(qi, qi, 0.0);  // structurally present even without a Y-bus diagonal
    // Keep the diagonal structurally present even for an isolated bus.
    put(pi, pi, 0.0);
    put(qi, qi, 0.0);
  }
  return RealMatrix::from_triplets(t, map.size(), map.size());
}

RealMatrix build_jacobian(const SinglePhaseNetwork& net, const VoltageState& state) {
  return build_jacobian(build_ybus(net), EquationMap(net), state);
}

void NewtonOptions::validate() const {
  if (!(tol_angle > 0.0) || !(tol_vm > 0.0)) throw std::invalid_argument("newton: tolerances must be positive");
  if (max_iter < 1) throw std::invalid_argument("newton: max_iter must be at least 1");
  linear.validate();
}


PowerFlowSolution solve_nr(const SinglePhaseNetwork& net, const NewtonOptions& opts, std::size_t thread_count,
                           const VoltageState* initial) {
  opts.validate();
  if (thread_count == 0) throw std::invalid_argument("solve_nr: thread_count must be at least 1");

  PowerFlowSolution sol;
  const ComplexMatrix ybus = build_ybus(net);
  const EquationMap map(net);
  if (opts.flat_start || initial == nullptr) {
    sol.state = flat_start(net);
  } else {
    if (initial->size() != net.size()) throw DimensionError("solve_nr: initial state size does not match");
    sol.state = *initial;
  }
  LinearSolver solver(opts.linear, thread_count);
  const std::size_t n_angle = map.angle_buses.size();

  for (std::size_t iter = 1; iter <= opts.max_iter; ++iter) {
    MismatchVector mm;
    {
      ScopedTimer timer(sol.timings.mismatch_eval);
      mm = power_mismatch(net, ybus, map, sol.state, thread_count);
    }
    sol.mismatch_history.push_back(mm.inf_norm());
    if (map.size() == 0) {
      sol.converged = true;
      return sol;
    }

    RealMatrix jac;
    {
      ScopedTimer timer(sol.timings.jacobian_build);
      jac = build_jacobian(ybus, map, sol.state, thread_count);
    }
    std::vector<double> dx;
    {
      ScopedTimer timer(sol.timings.linear_solve);
      dx = detail::newton_step(solver, jac, mm.stacked(), opts.fallback_to_direct, iter, sol.krylov_fallbacks,
                                sol.krylov_iterations);
    }
    sol.iterations = iter;

    double max_da = 0.0, max_dv = 0.0;
    for (std::size_t k = 0; k < n_angle; ++k) {
      sol.state.angle[map.angle_buses[k]] += dx[k];
      max_da = std::max(max_da, std::abs(dx[k]));
    }
    for (std::size_t k = 0; k < map.magnitude_buses.size(); ++k) {
      sol.state.magnitude[map.magnitude_buses[k]] += dx[n_angle + k];
      max_dv = std::max(max_dv, std::abs(dx[n_angle + k]));
    }
    sol.update_history.push_back(std::max(max_da, max_dv));
    if (!std::isfinite(max_da) || !std::isfinite(max_dv)) break;
    if (max_da <= opts.tol_angle && max_dv <= opts.tol_vm) {
      sol.converged = true;
      break;
    }
  }

  {
    ScopedTimer timer(sol.timings.mismatch_eval);
    sol.mismatch_history.push_back(power_mismatch(net, ybus, map, sol.state, thread_count).inf_norm());
  }
  return sol;
}

}  // namespace gridflow
