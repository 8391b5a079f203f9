#include <doctest.h>

#include <cmath>
#include <string>

#include "gridflow/errors.hpp"
#include "gridflow/io/case.hpp"
#include "gridflow/powerflow/newton.hpp"
#include "support/oracles.hpp"
#include "support/jacobian_checks.hpp"
#include "support/powerflow_oracles.hpp"

using namespace gridflow;
namespace gt = gridflow::testing;

namespace {

SinglePhaseNetwork ieee30() {
  return std::get<SinglePhaseNetwork>(load_case(std::string(GRIDFLOW_DATA_DIR) + "/ieee30.json").network);
}

SinglePhaseNetwork lossless_two_bus() {
  SinglePhaseNetwork net = gt::two_bus_network();
  net.buses[1].p_load = 0.0;
  return net;
}

}  // namespace

TEST_CASE("calc_pq on a lossless line at flat start is zero") {
  const SinglePhaseNetwork net = lossless_two_bus();
  const BusPowers pq = calc_pq(build_ybus(net), flat_start(net));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(pq.p[i] == doctest::Approx(0.0));
    CHECK(pq.q[i] == doctest::Approx(0.0));
  }
}

TEST_CASE("calc_pq of a lone shunt has Q = -b") {
  SinglePhaseNetwork net;
  net.buses = {Bus{.id = 1, .kind = BusKind::slack, .shunt_b = 0.25}};
  const BusPowers pq = calc_pq(build_ybus(net), flat_start(net));
  CHECK(pq.p[0] == 0.0);
  CHECK(pq.q[0] == doctest::Approx(-0.25));
}

TEST_CASE("calc_pq at the two-bus closed-form solution") {
  const SinglePhaseNetwork net = gt::two_bus_network();
  const std::complex<double> v2 = gt::two_bus_closed_form();
  const VoltageState s{{1.0, std::abs(v2)}, {0.0, std::arg(v2)}};
  const BusPowers pq = calc_pq(build_ybus(net), s);
  CHECK(std::abs(pq.p[1] + 1.0) <= 1e-9);
  CHECK(std::abs(pq.q[1]) <= 1e-9);
}

TEST_CASE("power mismatch examples") {
  SinglePhaseNetwork zero = lossless_two_bus();
  CHECK(power_mismatch(zero, flat_start(zero)).inf_norm() == 0.0);

  const SinglePhaseNetwork net = gt::two_bus_network();
  const MismatchVector m = power_mismatch(net, flat_start(net));
  REQUIRE(m.dp.size() == 1);
  REQUIRE(m.dq.size() == 1);
  CHECK(m.dp[0] == doctest::Approx(-1.0));
  CHECK(m.dq[0] == doctest::Approx(0.0));
  CHECK(m.stacked() == std::vector<double>{m.dp[0], m.dq[0]});
}

TEST_CASE("equation map: slack has no rows, PV only an angle row") {
  SinglePhaseNetwork net;
  net.buses = {Bus{.id = 1, .kind = BusKind::pq}, Bus{.id = 2, .kind = BusKind::slack},
               Bus{.id = 3, .kind = BusKind::pv}, Bus{.id = 4, .kind = BusKind::pq}};
  const EquationMap map(net);
  CHECK(map.angle_buses == std::vector<std::size_t>{0, 2, 3});
  CHECK(map.magnitude_buses == std::vector<std::size_t>{0, 3});
  CHECK(map.angle_row[1] == EquationMap::npos);
  CHECK(map.magnitude_row[2] == EquationMap::npos);
  CHECK(map.magnitude_row[3] == 4);
  CHECK(map.size() == 5);
}

TEST_CASE("two-bus lossless Jacobian at flat start") {
  const SinglePhaseNetwork net = lossless_two_bus();
  const RealMatrix j = build_jacobian(net, flat_start(net));
  CHECK(j.coeff(0, 0) == doctest::Approx(10.0));
  CHECK(j.coeff(1, 1) == doctest::Approx(10.0));
  CHECK(j.coeff(0, 1) == doctest::Approx(0.0));
  CHECK(j.coeff(1, 0) == doctest::Approx(0.0));
  CHECK(gt::jacobian_violations(net, flat_start(net)) == 0);
}

TEST_CASE("a PQ bus tied only to a shunt has a zero angle row") {
  SinglePhaseNetwork net = lossless_two_bus();
  net.buses.push_back(Bus{.id = 3, .kind = BusKind::pq, .shunt_b = 0.2});
  const EquationMap map(net);
  const VoltageState s = gt::random_feasible_state(net, 5);
  const Eigen::MatrixXd j = gt::to_eigen(build_jacobian(net, s));
  const Eigen::Index row = static_cast<Eigen::Index>(map.angle_row[2]);
  const auto angle_cols = static_cast<Eigen::Index>(map.angle_buses.size());
  CHECK(j.row(row).head(angle_cols).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Jacobian matches central differences on random states") {
  const SinglePhaseNetwork two = gt::two_bus_network();
  const SinglePhaseNetwork ieee = ieee30();
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    CHECK(gt::jacobian_violations(two, gt::random_feasible_state(two, seed)) == 0);
    CHECK(gt::jacobian_violations(ieee, gt::random_feasible_state(ieee, seed)) == 0);
  }
}

TEST_CASE("parallel Jacobian and mismatch equal the sequential ones") {
  const SinglePhaseNetwork net = ieee30();
  const ComplexMatrix y = build_ybus(net);
  const EquationMap map(net);
  const VoltageState s = gt::random_feasible_state(net, 9);
  const RealMatrix j1 = build_jacobian(y, map, s, 1);
  for (std::size_t t : {2u, 3u, 8u}) {
    const RealMatrix jt = build_jacobian(y, map, s, t);
    CHECK(std::vector<double>(jt.values().begin(), jt.values().end()) ==
          std::vector<double>(j1.values().begin(), j1.values().end()));
    CHECK(power_mismatch(net, y, map, s, t).stacked() == power_mismatch(net, y, map, s, 1).stacked());
  }
}

TEST_CASE("two-bus solve reaches the closed form") {
  const PowerFlowSolution sol = solve_nr(gt::two_bus_network());
  REQUIRE(sol.converged);
  CHECK(std::abs(sol.state.magnitude[1] - 0.994937) <= 1e-6);
  // The closed form V2 = 0.989899 - j0.1 has angle -atan(0.1 / 0.989899).
  const std::complex<double> v2 = gt::two_bus_closed_form();
  CHECK(std::abs(sol.state.angle[1] - std::arg(v2)) <= 1e-9);
  CHECK(std::abs(sol.state.phasor(1) - v2) <= 1e-10);
}

TEST_CASE("zero-load network converges at once to the setpoint profile") {
  SinglePhaseNetwork net = lossless_two_bus();
  net.buses.push_back(Bus{.id = 3, .kind = BusKind::pv, .v_setpoint = 1.0});
  net.branches.push_back({.from = 2, .to = 3, .r = 0.02, .x = 0.2});
  const PowerFlowSolution sol = solve_nr(net);
  CHECK(sol.converged);
  CHECK(sol.iterations <= 1);
  for (std::size_t i = 0; i < net.size(); ++i) {
    CHECK(std::abs(sol.state.magnitude[i] - 1.0) <= 1e-12);
    CHECK(std::abs(sol.state.angle[i]) <= 1e-12);
  }
}

TEST_CASE("IEEE-30 agrees with the dense Newton oracle") {
  const SinglePhaseNetwork net = ieee30();
  const PowerFlowSolution sol = solve_nr(net);
  REQUIRE(sol.converged);
  CHECK(sol.iterations <= 10);
  CHECK(sol.final_mismatch() <= 1e-6);
  CHECK(sol.mismatch_history.size() == sol.iterations + 1);
  CHECK(sol.update_history.size() == sol.iterations);
  // Residual-based check at the update-converged state.
  CHECK(power_mismatch(net, sol.state).inf_norm() <= 10 * 1e-8);

  const gt::DenseNewtonResult ref = gt::dense_newton(net);
  REQUIRE(ref.converged);
  for (std::size_t i = 0; i < net.size(); ++i) {
    CHECK(std::abs(sol.state.magnitude[i] - ref.vm(static_cast<Eigen::Index>(i))) <= 1e-6);
    CHECK(std::abs(sol.state.angle[i] - ref.va(static_cast<Eigen::Index>(i))) <= 1e-6);
  }
}

TEST_CASE("direct and Krylov inner solvers agree on IEEE-30") {
  const SinglePhaseNetwork net = ieee30();
  NewtonOptions krylov;
  krylov.linear.kind = SolverKind::krylov;
  const PowerFlowSolution a = solve_nr(net);
  const PowerFlowSolution b = solve_nr(net, krylov, 4);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(b.krylov_iterations > 0);
  for (std::size_t i = 0; i < net.size(); ++i) {
    CHECK(std::abs(a.state.magnitude[i] - b.state.magnitude[i]) <= 1e-6);
    CHECK(std::abs(a.state.angle[i] - b.state.angle[i]) <= 1e-6);
  }
}

TEST_CASE("iteration cap gives a non-converged result with history") {
  NewtonOptions opts;
  opts.max_iter = 2;
  const PowerFlowSolution sol = solve_nr(ieee30(), opts);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 2);
  CHECK(sol.mismatch_history.size() == 3);
}

TEST_CASE("a warm start at the solution converges in one step") {
  const SinglePhaseNetwork net = ieee30();
  const PowerFlowSolution first = solve_nr(net);
  NewtonOptions opts;
  opts.flat_start = false;
  const PowerFlowSolution again = solve_nr(net, opts, 1, &first.state);
  CHECK(again.converged);
  CHECK(again.iterations == 1);
  VoltageState wrong = first.state;
  wrong.angle.pop_back();
  wrong.magnitude.pop_back();
  CHECK_THROWS_AS(solve_nr(net, opts, 1, &wrong), DimensionError);
}

TEST_CASE("islanded PQ bus makes the Jacobian singular") {
  SinglePhaseNetwork net = gt::two_bus_network();
  net.buses.push_back(Bus{.id = 3, .kind = BusKind::pq});
  try {
    solve_nr(net);
    FAIL("expected SingularJacobianError");
  } catch (const SingularJacobianError& e) {
    CHECK(e.iteration() == 1);
  }
}

TEST_CASE("invalid options are rejected") {
  NewtonOptions opts;
  opts.tol_angle = 0.0;
  CHECK_THROWS_AS(solve_nr(gt::two_bus_network(), opts), std::invalid_argument);
  CHECK_THROWS_AS(solve_nr(gt::two_bus_network(), NewtonOptions{}, 0), std::invalid_argument);
}
