#include "gridflow/grid/network.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gridflow {

std::string_view to_string(BusKind kind) noexcept {
  switch (kind) {
    case BusKind::slack: return "slack";
    case BusKind::pv: return "pv";
    case BusKind::pq: return "pq";
  }
  return "pq";
}

BusKind parse_bus_kind(std::string_view name) {
  if (name == "slack") return BusKind::slack;
  if (name == "pv") return BusKind::pv;
  if (name == "pq") return BusKind::pq;
  throw std::invalid_argument("unknown bus type '" + std::string(name) + "' (expected slack, pv or pq)");
}

std::unordered_map<std::size_t, std::size_t> SinglePhaseNetwork::positions() const {
  std::unordered_map<std::size_t, std::size_t> pos;
  pos.reserve(buses.size());
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!pos.emplace(buses[i].id, i).second) {
      throw NetworkError("duplicate bus id " + std::to_string(buses[i].id));
    }
  }
  return pos;
}

std::vector<std::complex<double>> VoltageState::phasors() const {
  std::vector<std::complex<double>> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[i] = phasor(i);
  return v;
}

VoltageState flat_start(const SinglePhaseNetwork& net) {
  VoltageState s;
  s.magnitude.resize(net.size());
  s.angle.assign(net.size(), 0.0);
  for (std::size_t i = 0; i < net.size(); ++i) {
    s.magnitude[i] = net.buses[i].kind == BusKind::pq ? 1.0 : net.buses[i].v_setpoint;
  }
  return s;
}

ComplexMatrix build_ybus(const SinglePhaseNetwork& net) {
  using C = std::complex<double>;
  const auto pos = net.positions();
  std::vector<Triplet<C>> t;
  t.reserve(net.size() + 4 * net.branches.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    t.push_back({i, i, C(net.buses[i].shunt_g, net.buses[i].shunt_b)});
  }
  for (std::size_t k = 0; k < net.branches.size(); ++k) {
    const Branch& br = net.branches[k];
    const auto f = pos.find(br.from);
    const auto g = pos.find(br.to);
    if (f == pos.end() || g == pos.end()) {
      throw NetworkError("branch " + std::to_string(k) + " references an unknown bus");
    }
    if (br.r == 0.0 && br.x == 0.0) throw NetworkError("branch " + std::to_string(k) + " has zero impedance");
    const C y = 1.0 / C(br.r, br.x);
    const C half_charging(0.0, br.b_charging / 2.0);
    const std::size_t i = f->second;
    const std::size_t j = g->second;
    t.push_back({i, i, y + half_charging});
    t.push_back({j, j, y + half_charging});
    t.push_back({i, j, -y});
    t.push_back({j, i, -y});
  }
  return ComplexMatrix::from_triplets(t, net.size(), net.size());
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::slack_count: return "slack_count";
    case ViolationKind::duplicate_bus: return "duplicate_bus";
    case ViolationKind::dangling_endpoint: return "dangling_endpoint";
    case ViolationKind::self_loop: return "self_loop";
    case ViolationKind::zero_impedance: return "zero_impedance";
    case ViolationKind::disconnected: return "disconnected";
    case ViolationKind::bad_setpoint: return "bad_setpoint";
    case ViolationKind::non_finite: return "non_finite";
    case ViolationKind::phase_mismatch: return "phase_mismatch";
    case ViolationKind::bad_source: return "bad_source";
  }
  return "unknown";
}

std::size_t ValidationReport::count(ViolationKind kind) const noexcept {
  std::size_t n = 0;
  for (const auto& v : violations) n += v.kind == kind ? 1 : 0;
  return n;
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) {
    out += v.location;
    out += ": ";
    out += v.message;
    out += '\n';
  }
  return out;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

ValidationReport validate_network(const SinglePhaseNetwork& net) {
  ValidationReport report;
  const auto add = [&](ViolationKind kind, std::string location, std::string message) {
    report.violations.push_back({kind, std::move(location), std::move(message)});
  };

  std::unordered_map<std::size_t, std::size_t> pos;
  std::size_t slacks = 0;
  std::string extra_slack;  // the second slack, where one exists
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    const Bus& b = net.buses[i];
    const std::string loc = "network.buses[" + std::to_string(i) + "]";
    if (!pos.emplace(b.id, i).second) add(ViolationKind::duplicate_bus, loc + ".id", "duplicate bus id " + std::to_string(b.id));
    if (b.kind == BusKind::slack && ++slacks == 2) extra_slack = loc + ".type";
    for (double v : {b.p_load, b.q_load, b.p_gen, b.v_setpoint, b.shunt_g, b.shunt_b}) {
      if (!std::isfinite(v)) {
        add(ViolationKind::non_finite, loc, "bus " + std::to_string(b.id) + " has a non-finite value");
        break;
      }
    }
    if (b.kind != BusKind::pq && !(b.v_setpoint > 0.0)) {
      add(ViolationKind::bad_setpoint, loc + ".v_setpoint", "bus " + std::to_string(b.id) + " needs a positive voltage setpoint");
    }
  }
  if (slacks != 1) {
    add(ViolationKind::slack_count, slacks == 0 ? "network.buses" : extra_slack, "expected exactly one slack bus, found " + std::to_string(slacks));
  }
  if (!std::isfinite(net.base_mva) || !(net.base_mva > 0.0)) {
    add(ViolationKind::non_finite, "network.base_mva", "base_mva must be positive and finite");
  }

  std::vector<std::size_t> parent(net.buses.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t k = 0; k < net.branches.size(); ++k) {
    const Branch& br = net.branches[k];
    const std::string loc = "network.branches[" + std::to_string(k) + "]";
    const auto f = pos.find(br.from);
    const auto g = pos.find(br.to);
    if (f == pos.end()) add(ViolationKind::dangling_endpoint, loc + ".from", "unknown bus id " + std::to_string(br.from));
    if (g == pos.end()) add(ViolationKind::dangling_endpoint, loc + ".to", "unknown bus id " + std::to_string(br.to));
    if (br.from == br.to) add(ViolationKind::self_loop, loc, "branch connects bus " + std::to_string(br.from) + " to itself");
    if (!std::isfinite(br.r) || !std::isfinite(br.x) || !std::isfinite(br.b_charging)) {
      add(ViolationKind::non_finite, loc, "branch has a non-finite value");
    } else if (br.r * br.r + br.x * br.x == 0.0) {
      add(ViolationKind::zero_impedance, loc, "branch has zero series impedance");
    }
    if (f != pos.end() && g != pos.end()) parent[find_root(parent, f->second)] = find_root(parent, g->second);
  }

  if (!net.buses.empty() && report.count(ViolationKind::duplicate_bus) == 0) {
    std::size_t components = 0;
    for (std::size_t i = 0; i < net.buses.size(); ++i) components += find_root(parent, i) == i ? 1 : 0;
    if (components > 1) {
      add(ViolationKind::disconnected, "network.branches",
          "network splits into " + std::to_string(components) + " disconnected components");
    }
  }
  return report;
}

}  // namespace gridflow
