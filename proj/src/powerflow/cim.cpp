#include "gridflow/powerflow/cim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gridflow/linear/solver.hpp"
#include "newton_step.hpp"

namespace gridflow {

using C = std::complex<double>;

namespace {

void guard_voltage(C v, std::size_t node) {
  if (!(std::abs(v) >= kNearZeroVoltage)) {
    throw NearZeroVoltageError(node, "phase-node " + std::to_string(node) + " voltage magnitude " +
                                         std::to_string(std::abs(v)) + " p.u. is below the near-zero guard");
  }
}

/// Specified current and its derivatives with respect to (Re V, Im V).
struct CurrentAndSlopes {
  C current;
  double dim_dre, dim_dim, dre_dre, dre_dim;
};

CurrentAndSlopes load_current(const ZipLoad& load, C v) {
  const double e = v.real();
  const double f = v.imag();
  const double m2 = e * e + f * f;
  const double m = std::sqrt(m2);
  const LoadPower l = zip_load(load, m);
  // Injected power is the negative of the load.
  const double p = -l.p;
  const double q = -l.q;
  const double dp_dm = -(load.p_current + 2.0 * load.p_impedance * m);
  const double dq_dm = -(load.q_current + 2.0 * load.q_impedance * m);

  // conj(S / V) = (P - jQ)(e + jf) / m^2
  const double n_re = p * e + q * f;
  const double n_im = p * f - q * e;

  const double dp_de = dp_dm * e / m, dp_df = dp_dm * f / m;
  const double dq_de = dq_dm * e / m, dq_df = dq_dm * f / m;
  const double dnre_de = dp_de * e + p + dq_de * f;
  const double dnre_df = dp_df * e + dq_df * f + q;
  const double dnim_de = dp_de * f - dq_de * e - q;
  const double dnim_df = dp_df * f + p - dq_df * e;

  const double m4 = m2 * m2;
  return {C(n_re / m2, n_im / m2), (dnim_de * m2 - n_im * 2.0 * e) / m4, (dnim_df * m2 - n_im * 2.0 * f) / m4,
          (dnre_de * m2 - n_re * 2.0 * e) / m4, (dnre_df * m2 - n_re * 2.0 * f) / m4};
}

}  // namespace

C specified_current(const Bus3& bus, Phase phase, C v) {
  guard_voltage(v, 0);
  return load_current(bus.load(phase), v).current;
}

std::vector<C> calculated_current(const ComplexMatrix& ybus3, const VoltageState3& state, std::size_t thread_count) {
  return spmv(ybus3, state, thread_count);
}

CimLayout::CimLayout(const ThreePhaseNetwork& net, const PhaseIndexer& indexer)
    : first_(indexer.size(), npos), second_(indexer.size(), npos) {
  const std::size_t source = net.source_position();
  std::size_t k = 0;
  while (k < indexer.size()) {
    const std::size_t bus = indexer.node(k).bus;
    std::size_t end = k;
    while (end < indexer.size() && indexer.node(end).bus == bus) ++end;
    if (bus != source) {
      const std::size_t m = end - k;
      for (std::size_t r = 0; r < m; ++r) {
        first_[k + r] = size_ + r;
        second_[k + r] = size_ + m + r;
      }
      size_ += 2 * m;
    }
    k = end;
  }
}

std::vector<double> current_mismatch(const ThreePhaseNetwork& net, const PhaseIndexer& indexer, const CimLayout& layout,
                                     const ComplexMatrix& ybus3, const VoltageState3& state,
                                     std::size_t thread_count) {
  if (state.size() != indexer.size()) throw DimensionError("current_mismatch: state size does not match the network");
  const std::vector<C> calc = calculated_current(ybus3, state, thread_count);
  std::vector<double> out(layout.size(), 0.0);
  for (std::size_t k = 0; k < indexer.size(); ++k) {
    if (!layout.is_free(k)) continue;
    guard_voltage(state[k], k);
    const auto& node = indexer.node(k);
    const C d = load_current(net.buses[node.bus].load(node.phase), state[k]).current - calc[k];
    out[layout.first(k)] = d.imag();
    out[layout.second(k)] = d.real();
  }
  return out;
}

std::vector<double> current_mismatch(const ThreePhaseNetwork& net, const VoltageState3& state) {
  const PhaseIndexer idx(net);
  return current_mismatch(net, idx, CimLayout(net, idx), build_ybus3(net, idx), state);
}

AdjustingBlocks adjusting_blocks(const Bus3& bus, const std::array<C, 3>& v) {
  AdjustingBlocks blk;
  for (Phase p : bus.phases.phases()) {
    const auto i = static_cast<std::size_t>(p);
    if (bus.load(p).is_zero()) continue;
    guard_voltage(v[i], i);
    const CurrentAndSlopes s = load_current(bus.load(p), v[i]);
    blk.a[i][i] = s.dim_dre;
    blk.b[i][i] = s.dim_dim;
    blk.c[i][i] = s.dre_dre;
    blk.d[i][i] = s.dre_dim;
  }
  return blk;
}

RealMatrix build_cim_jacobian(const ThreePhaseNetwork& net, const PhaseIndexer& indexer, const CimLayout& layout,
                              const ComplexMatrix& ybus3, const VoltageState3& state) {
  if (state.size() != indexer.size() || ybus3.rows() != indexer.size()) {
    throw DimensionError("build_cim_jacobian: sizes do not agree");
  }
  const auto off = ybus3.row_offsets();
  const auto col = ybus3.col_indices();
  const auto val = ybus3.values();
  std::vector<Triplet<double>> t;
  t.reserve(4 * ybus3.nnz());
  for (std::size_t r = 0; r < indexer.size(); ++r) {
    if (!layout.is_free(r)) continue;
    const std::size_t row_im = layout.first(r);
    const std::size_t row_re = layout.second(r);
    for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
      const std::size_t c = col[k];
      if (!layout.is_free(c)) continue;
      const double g = val[k].real();
      const double b = val[k].imag();
      const std::size_t col_re = layout.first(c);
      const std::size_t col_im = layout.second(c);
      t.push_back({row_im, col_re, b});
      t.push_back({row_im, col_im, g});
      t.push_back({row_re, col_re, g});
      t.push_back({row_re, col_im, -b});
    }
    const auto& node = indexer.node(r);
    const ZipLoad& load = net.buses[node.bus].load(node.phase);
    if (load.is_zero()) continue;
    guard_voltage(state[r], r);
    const CurrentAndSlopes s = load_current(load, state[r]);
    t.push_back({row_im, layout.first(r), -s.dim_dre});
    t.push_back({row_im, layout.second(r), -s.dim_dim});
    t.push_back({row_re, layout.first(r), -s.dre_dre});
    t.push_back({row_re, layout.second(r), -s.dre_dim});
  }
  return RealMatrix::from_triplets(t, layout.size(), layout.size());
}

RealMatrix build_cim_jacobian(const ThreePhaseNetwork& net, const VoltageState3& state) {
  const PhaseIndexer idx(net);
  return build_cim_jacobian(net, idx, CimLayout(net, idx), build_ybus3(net, idx), state);
}

void CimOptions::validate() const {
  if (!(tol_v > 0.0)) throw std::invalid_argument("cim: tol_v must be positive");
  if (max_iter < 1) throw std::invalid_argument("cim: max_iter must be at least 1");
  linear.validate();
}

ThreePhaseSolution solve_cim(const ThreePhaseNetwork& net, const CimOptions& opts, std::size_t thread_count) {
  opts.validate();
  if (thread_count == 0) throw std::invalid_argument("solve_cim: thread_count must be at least 1");

  ThreePhaseSolution sol;
  sol.indexer = PhaseIndexer(net);
  const PhaseIndexer& idx = sol.indexer;
  const CimLayout layout(net, idx);
  const ComplexMatrix ybus = build_ybus3(net, idx);
  sol.state = flat_start(net, idx);
  LinearSolver solver(opts.linear, thread_count);

  const auto inf_norm = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  };

  for (std::size_t iter = 1; iter <= opts.max_iter; ++iter) {
    std::vector<double> mismatch;
    {
      ScopedTimer timer(sol.timings.mismatch_eval);
      mismatch = current_mismatch(net, idx, layout, ybus, sol.state, thread_count);
    }
    sol.mismatch_history.push_back(inf_norm(mismatch));
    if (layout.size() == 0) {
      sol.converged = true;
      return sol;
    }
    RealMatrix jac;
    {
      ScopedTimer timer(sol.timings.jacobian_build);
      jac = build_cim_jacobian(net, idx, layout, ybus, sol.state);
    }
    std::vector<double> dv;
    {
      ScopedTimer timer(sol.timings.linear_solve);
      dv = detail::newton_step(solver, jac, mismatch, opts.fallback_to_direct, iter, sol.krylov_fallbacks,
                               sol.krylov_iterations);
    }
    sol.iterations = iter;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (layout.is_free(k)) sol.state[k] += C(dv[layout.first(k)], dv[layout.second(k)]);
    }
    const double step = inf_norm(dv);
    sol.update_history.push_back(step);
    if (!std::isfinite(step)) break;
    if (step <= opts.tol_v) {
      sol.converged = true;
      break;
    }
  }
  {
    ScopedTimer timer(sol.timings.mismatch_eval);
    sol.mismatch_history.push_back(inf_norm(current_mismatch(net, idx, layout, ybus, sol.state, thread_count)));
  }
  return sol;
}

}  // namespace gridflow
