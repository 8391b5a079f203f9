#include <doctest.h>

#include <string>

#include "gridflow/errors.hpp"
#include "gridflow/grid/network.hpp"
#include "gridflow/io/case.hpp"
#include "support/oracles.hpp"
#include "support/powerflow_oracles.hpp"

using namespace gridflow;
using gridflow::testing::to_eigen;

namespace {

SinglePhaseNetwork ieee30() {
  return std::get<SinglePhaseNetwork>(load_case(std::string(GRIDFLOW_DATA_DIR) + "/ieee30.json").network);
}

SinglePhaseNetwork ring(std::size_t n, bool with_shunts) {
  SinglePhaseNetwork net;
  for (std::size_t i = 1; i <= n; ++i) {
    Bus b{.id = i, .kind = i == 1 ? BusKind::slack : BusKind::pq};
    if (with_shunts) b.shunt_b = 0.01 * static_cast<double>(i);
    net.buses.push_back(b);
  }
  for (std::size_t i = 1; i <= n; ++i) {
    net.branches.push_back({.from = i, .to = i % n + 1, .r = 0.01 * static_cast<double>(i), .x = 0.1 + 0.01 * i});
  }
  return net;
}

}  // namespace

TEST_CASE("two-bus Y-bus from y = 1 - j2") {
  SinglePhaseNetwork net;
  net.buses = {Bus{.id = 1, .kind = BusKind::slack}, Bus{.id = 2}};
  // 1 / (r + jx) = 1 - j2  =>  r + jx = (1 + j2) / 5
  net.branches = {Branch{.from = 1, .to = 2, .r = 0.2, .x = 0.4}};
  const Eigen::MatrixXcd y = to_eigen(build_ybus(net));
  const std::complex<double> yy(1.0, -2.0);
  CHECK(std::abs(y(0, 0) - yy) < 1e-14);
  CHECK(std::abs(y(1, 1) - yy) < 1e-14);
  CHECK(std::abs(y(0, 1) + yy) < 1e-14);
  CHECK(std::abs(y(1, 0) + yy) < 1e-14);
}

TEST_CASE("single bus with only a shunt") {
  SinglePhaseNetwork net;
  net.buses = {Bus{.id = 1, .kind = BusKind::slack, .shunt_b = 0.5}};
  const ComplexMatrix y = build_ybus(net);
  REQUIRE(y.rows() == 1);
  CHECK(y.coeff(0, 0) == std::complex<double>(0.0, 0.5));
}

TEST_CASE("rows of a shunt-free Y-bus sum to zero") {
  for (std::size_t n : {3u, 10u, 57u}) {
    const Eigen::MatrixXcd y = to_eigen(build_ybus(ring(n, false)));
    CHECK(y.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("Y-bus is exactly symmetric and matches the reference assembly") {
  for (const SinglePhaseNetwork& net : {ieee30(), ring(12, true)}) {
    const Eigen::MatrixXcd y = to_eigen(build_ybus(net));
    CHECK((y - y.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXcd ref = gridflow::testing::reference_ybus(net).dense();
    CHECK((y - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("line charging is split between the two ends") {
  SinglePhaseNetwork net;
  net.buses = {Bus{.id = 1, .kind = BusKind::slack}, Bus{.id = 2}};
  net.branches = {Branch{.from = 1, .to = 2, .r = 0.0, .x = 0.5, .b_charging = 0.3}};
  const ComplexMatrix y = build_ybus(net);
  CHECK(y.coeff(0, 0).imag() == doctest::Approx(-2.0 + 0.15));
  CHECK(y.coeff(1, 1).imag() == doctest::Approx(-2.0 + 0.15));
  CHECK(y.coeff(0, 1).imag() == doctest::Approx(2.0));
}

TEST_CASE("zero-impedance branch is rejected") {
  SinglePhaseNetwork net = ring(3, false);
  net.branches[1].r = 0.0;
  net.branches[1].x = 0.0;
  CHECK_THROWS_AS(build_ybus(net), NetworkError);
  const ValidationReport r = validate_network(net);
  CHECK(r.count(ViolationKind::zero_impedance) == 1);
}

TEST_CASE("IEEE-30 validates clean") {
  const SinglePhaseNetwork net = ieee30();
  CHECK(net.size() == 30);
  const ValidationReport r = validate_network(net);
  CHECK_MESSAGE(r.ok(), r.summary());
}

TEST_CASE("two slack buses give one violation") {
  SinglePhaseNetwork net = ring(4, false);
  net.buses[2].kind = BusKind::slack;
  const ValidationReport r = validate_network(net);
  CHECK(r.violations.size() == 1);
  CHECK(r.count(ViolationKind::slack_count) == 1);
}

TEST_CASE("missing slack is a violation") {
  SinglePhaseNetwork net = ring(4, false);
  net.buses[0].kind = BusKind::pv;
  CHECK(validate_network(net).count(ViolationKind::slack_count) == 1);
}

TEST_CASE("branch to an unknown bus gives one violation with its location") {
  SinglePhaseNetwork net = ring(4, false);
  net.branches[3].to = 99;
  const ValidationReport r = validate_network(net);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].kind == ViolationKind::dangling_endpoint);
  CHECK(r.violations[0].location == "network.branches[3].to");
}

TEST_CASE("disconnected islands, self loops, duplicates and bad setpoints are reported") {
  SinglePhaseNetwork net = ring(4, false);
  net.buses.push_back(Bus{.id = 5});
  net.buses.push_back(Bus{.id = 6});
  net.branches.push_back({.from = 5, .to = 6, .x = 0.1});
  CHECK(validate_network(net).count(ViolationKind::disconnected) >= 1);

  SinglePhaseNetwork loop = ring(3, false);
  loop.branches.push_back({.from = 2, .to = 2, .x = 0.1});
  CHECK(validate_network(loop).count(ViolationKind::self_loop) == 1);

  SinglePhaseNetwork dup = ring(3, false);
  dup.buses.push_back(Bus{.id = 2});
  CHECK(validate_network(dup).count(ViolationKind::duplicate_bus) == 1);
  CHECK_THROWS_AS(dup.positions(), NetworkError);

  SinglePhaseNetwork setpoint = ring(3, false);
  setpoint.buses[0].v_setpoint = 0.0;
  CHECK(validate_network(setpoint).count(ViolationKind::bad_setpoint) == 1);
}

TEST_CASE("flat start uses setpoints at slack and PV buses") {
  SinglePhaseNetwork net = ring(3, false);
  net.buses[0].v_setpoint = 1.05;
  net.buses[1].kind = BusKind::pv;
  net.buses[1].v_setpoint = 1.02;
  net.buses[2].v_setpoint = 1.3;  // ignored at a PQ bus
  const VoltageState s = flat_start(net);
  CHECK(s.magnitude == std::vector<double>{1.05, 1.02, 1.0});
  CHECK(s.angle == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("bus kinds round-trip through their names") {
  for (BusKind k : {BusKind::slack, BusKind::pv, BusKind::pq}) CHECK(parse_bus_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_bus_kind("PQ"), std::invalid_argument);
}
