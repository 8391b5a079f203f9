#pragma once

// Reference power-flow computations for the tests. The admittance matrix is
// rebuilt here from the raw branch data, residuals are evaluated in long
// double, and the dense Newton solver uses the complex-derivative form of the
// Jacobian rather than the library's polar sine/cosine formulas.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gridflow/grid/network.hpp"

namespace gridflow::testing {

using ldouble = long double;
using lcomplex = std::complex<ldouble>;

/// Row lists of (column, value).
struct ReferenceY {
  std::vector<std::vector<std::pair<std::size_t, lcomplex>>> rows;

  std::size_t size() const { return rows.size(); }
  void add(std::size_t i, std::size_t j, lcomplex v) {
    for (auto& [c, x] : rows[i]) {
      if (c == j) {
        x += v;
        return;
      }
    }
    rows[i].emplace_back(j, v);
  }
  Eigen::MatrixXcd dense() const {
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t i = 0; i < size(); ++i)
      for (const auto& [j, v] : rows[i])
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            std::complex<double>(static_cast<double>(v.real()), static_cast<double>(v.imag()));
    return m;
  }
};

inline ReferenceY reference_ybus(const SinglePhaseNetwork& net) {
  ReferenceY y;
  y.rows.resize(net.buses.size());
  auto pos = [&](std::size_t id) {
    for (std::size_t k = 0; k < net.buses.size(); ++k)
      if (net.buses[k].id == id) return k;
    throw std::out_of_range("reference_ybus: unknown bus");
  };
  for (std::size_t k = 0; k < net.buses.size(); ++k) {
    y.add(k, k, lcomplex(net.buses[k].shunt_g, net.buses[k].shunt_b));
  }
  for (const Branch& br : net.branches) {
    const std::size_t f = pos(br.from), t = pos(br.to);
    const lcomplex series = ldouble(1) / lcomplex(br.r, br.x);
    const lcomplex half(0, ldouble(br.b_charging) / 2);
    y.add(f, f, series + half);
    y.add(t, t, series + half);
    y.add(f, t, -series);
    y.add(t, f, -series);
  }
  return y;
}

/// Complex power injections S_i = V_i conj((Y V)_i) in extended precision.
inline std::vector<lcomplex> reference_injections(const ReferenceY& y, const std::vector<ldouble>& vm,
                                                  const std::vector<ldouble>& va) {
  std::vector<lcomplex> v(vm.size()), s(vm.size());
  for (std::size_t i = 0; i < vm.size(); ++i) v[i] = std::polar(vm[i], va[i]);
  for (std::size_t i = 0; i < vm.size(); ++i) {
    lcomplex acc = 0;
    for (const auto& [j, yij] : y.rows[i]) acc += yij * v[j];
    s[i] = v[i] * std::conj(acc);
  }
  return s;
}

/// Magnitudes in [0.95, 1.05] and angles in [-0.3, 0.3] rad at every
/// non-slack bus; slack angle 0, slack and PV magnitudes at setpoints.
inline VoltageState random_feasible_state(const SinglePhaseNetwork& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.95, 1.05), ang(-0.3, 0.3);
  VoltageState s;
  for (const Bus& b : net.buses) {
    const double m = mag(rng), a = ang(rng);
    s.magnitude.push_back(b.kind == BusKind::pq ? m : b.v_setpoint);
    s.angle.push_back(b.kind == BusKind::slack ? 0.0 : a);
  }
  return s;
}

struct DenseNewtonResult {
  Eigen::VectorXd vm;
  Eigen::VectorXd va;
  int iterations = 0;
  bool converged = false;
};

/// Full-matrix Newton on the complex mismatch S_spec - V conj(Y V), stopping
/// when the residual infinity-norm falls below `tol`.
inline DenseNewtonResult dense_newton(const SinglePhaseNetwork& net, double tol = 1e-12, int max_iter = 30) {
  using Eigen::Index;
  const Eigen::MatrixXcd y = reference_ybus(net).dense();
  const Index n = y.rows();
  std::vector<Index> pvpq, pq;
  Eigen::VectorXcd s_spec(n);
  DenseNewtonResult r;
  r.vm.resize(n);
  r.va = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Bus& b = net.buses[static_cast<std::size_t>(i)];
    s_spec(i) = std::complex<double>(b.p_gen - b.p_load, -b.q_load);
    r.vm(i) = b.kind == BusKind::pq ? 1.0 : b.v_setpoint;
    if (b.kind != BusKind::slack) pvpq.push_back(i);
    if (b.kind == BusKind::pq) pq.push_back(i);
  }
  const Index na = static_cast<Index>(pvpq.size()), nm = static_cast<Index>(pq.size());
  const std::complex<double> j1(0.0, 1.0);

  for (r.iterations = 0; r.iterations <= max_iter; ++r.iterations) {
    Eigen::VectorXcd v(n);
    for (Index i = 0; i < n; ++i) v(i) = std::polar(r.vm(i), r.va(i));
    const Eigen::VectorXcd current = y * v;
    const Eigen::VectorXcd mis = v.cwiseProduct(current.conjugate()) - s_spec;
    Eigen::VectorXd f(na + nm);
    for (Index k = 0; k < na; ++k) f(k) = mis(pvpq[k]).real();
    for (Index k = 0; k < nm; ++k) f(na + k) = mis(pq[k]).imag();
    if (f.lpNorm<Eigen::Infinity>() < tol) {
      r.converged = true;
      return r;
    }
    if (r.iterations == max_iter) break;

    // dS/dVa = j diag(V) conj(diag(I) - Y diag(V)); dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
    const Eigen::VectorXcd vnorm = v.cwiseQuotient(r.vm.cast<std::complex<double>>());
    const Eigen::MatrixXcd ds_dva =
        j1 * v.asDiagonal() * (Eigen::MatrixXcd(current.asDiagonal()) - y * v.asDiagonal()).conjugate();
    const Eigen::MatrixXcd ds_dvm = v.asDiagonal() * (y * vnorm.asDiagonal()).conjugate() +
                                    Eigen::MatrixXcd(current.conjugate().asDiagonal()) * vnorm.asDiagonal();
    Eigen::MatrixXd jac(na + nm, na + nm);
    for (Index a = 0; a < na; ++a) {
      for (Index c = 0; c < na; ++c) jac(a, c) = ds_dva(pvpq[a], pvpq[c]).real();
      for (Index c = 0; c < nm; ++c) jac(a, na + c) = ds_dvm(pvpq[a], pq[c]).real();
    }
    for (Index a = 0; a < nm; ++a) {
      for (Index c = 0; c < na; ++c) jac(na + a, c) = ds_dva(pq[a], pvpq[c]).imag();
      for (Index c = 0; c < nm; ++c) jac(na + a, na + c) = ds_dvm(pq[a], pq[c]).imag();
    }
    const Eigen::VectorXd dx = jac.fullPivLu().solve(-f);
    for (Index k = 0; k < na; ++k) r.va(pvpq[k]) += dx(k);
    for (Index k = 0; k < nm; ++k) r.vm(pq[k]) += dx(na + k);
  }
  return r;
}

/// The two-bus closed form: slack 1<0, PQ bus through y = -j10 with load
/// P = 1, Q = 0. Writing V2 = a + jb, P balance gives 10 b = -1 and Q balance
/// a^2 - a + b^2 = 0; the high-voltage root is taken.
inline std::complex<double> two_bus_closed_form() {
  const double b = -0.1;
  const double a = 0.5 + std::sqrt(0.25 - b * b);
  return {a, b};
}

inline SinglePhaseNetwork two_bus_network() {
  SinglePhaseNetwork net;
  net.buses = {Bus{.id = 1, .kind = BusKind::slack}, Bus{.id = 2, .kind = BusKind::pq, .p_load = 1.0}};
  net.branches = {Branch{.from = 1, .to = 2, .r = 0.0, .x = 0.1}};
  return net;
}

}  // namespace gridflow::testing
