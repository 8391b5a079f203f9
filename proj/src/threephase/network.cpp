#include "gridflow/threephase/network.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace gridflow {

using C = std::complex<double>;

char phase_letter(Phase p) noexcept { return "abc"[static_cast<std::size_t>(p)]; }

double nominal_angle(Phase p) noexcept {
  constexpr double third = 2.0 * std::numbers::pi / 3.0;
  switch (p) {
    case Phase::a: return 0.0;
    case Phase::b: return -third;
    case Phase::c: return third;
  }
  return 0.0;
}

PhaseSet PhaseSet::parse(std::string_view letters) {
  PhaseSet s;
  for (char ch : letters) {
    if (ch < 'a' || ch > 'c') throw std::invalid_argument("invalid phase letter '" + std::string(1, ch) + "'");
    const auto p = static_cast<Phase>(ch - 'a');
    if (s.has(p)) throw std::invalid_argument("phase '" + std::string(1, ch) + "' listed twice");
    s.add(p);
  }
  return s;
}

std::vector<Phase> PhaseSet::phases() const {
  std::vector<Phase> out;
  for (Phase p : kAllPhases)
    if (has(p)) out.push_back(p);
  return out;
}

std::string PhaseSet::letters() const {
  std::string out;
  for (Phase p : phases()) out += phase_letter(p);
  return out;
}

bool ZipLoad::is_zero() const noexcept {
  return p_constant == 0.0 && p_current == 0.0 && p_impedance == 0.0 && q_constant == 0.0 && q_current == 0.0 &&
         q_impedance == 0.0;
}

std::unordered_map<std::size_t, std::size_t> ThreePhaseNetwork::positions() const {
  std::unordered_map<std::size_t, std::size_t> pos;
  pos.reserve(buses.size());
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!pos.emplace(buses[i].id, i).second) throw NetworkError("duplicate bus id " + std::to_string(buses[i].id));
  }
  return pos;
}

std::size_t ThreePhaseNetwork::source_position() const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == source_bus) return i;
  throw NetworkError("source bus " + std::to_string(source_bus) + " does not exist");
}

std::size_t phase_index(std::size_t bus_number, Phase phase) {
  if (bus_number == 0) throw std::invalid_argument("phase_index: bus numbers start at 1");
  return 3 * (bus_number - 1) + static_cast<std::size_t>(phase) + 1;
}

std::size_t phase_index(const Bus3& bus, std::size_t bus_number, Phase phase) {
  if (!bus.phases.has(phase)) {
    throw NetworkError("bus " + std::to_string(bus.id) + " has no phase " + std::string(1, phase_letter(phase)));
  }
  return phase_index(bus_number, phase);
}

PhaseIndexer::PhaseIndexer(const ThreePhaseNetwork& net) : lookup_(net.buses.size()) {
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    lookup_[i].fill(kAbsent);
    for (Phase p : kAllPhases) {
      if (!net.buses[i].phases.has(p)) continue;
      lookup_[i][static_cast<std::size_t>(p)] = nodes_.size();
      nodes_.push_back({i, p});
    }
  }
}

bool PhaseIndexer::has(std::size_t bus, Phase phase) const noexcept {
  return bus < lookup_.size() && lookup_[bus][static_cast<std::size_t>(phase)] != kAbsent;
}

std::size_t PhaseIndexer::index(std::size_t bus, Phase phase) const {
  if (!has(bus, phase)) {
    throw NetworkError("no phase-node for phase " + std::string(1, phase_letter(phase)) + " at bus position " +
                       std::to_string(bus));
  }
  return lookup_[bus][static_cast<std::size_t>(phase)];
}

ComplexMatrix build_ybus3(const ThreePhaseNetwork& net, const PhaseIndexer& idx) {
  const auto pos = net.positions();
  std::vector<Triplet<C>> t;
  t.reserve(idx.size() + 4 * 9 * net.branches.size());
  for (std::size_t k = 0; k < idx.size(); ++k) t.push_back({k, k, C{}});
  for (std::size_t k = 0; k < net.branches.size(); ++k) {
    const Branch3& br = net.branches[k];
    const auto f = pos.find(br.from);
    const auto g = pos.find(br.to);
    if (f == pos.end() || g == pos.end()) throw NetworkError("branch " + std::to_string(k) + " references an unknown bus");
    const std::size_t i = f->second;
    const std::size_t j = g->second;
    const auto present = br.phases.phases();
    for (Phase s : present) {
      const auto si = static_cast<std::size_t>(s);
      const std::size_t is = idx.index(i, s);
      const std::size_t js = idx.index(j, s);
      for (Phase u : present) {
        const auto ui = static_cast<std::size_t>(u);
        const std::size_t iu = idx.index(i, u);
        const std::size_t ju = idx.index(j, u);
        const C y = br.y_series[si][ui];
        const C sh_from = br.y_shunt_from ? (*br.y_shunt_from)[si][ui] : C{};
        const C sh_to = br.y_shunt_to ? (*br.y_shunt_to)[si][ui] : C{};
        if (y != C{} || sh_from != C{}) t.push_back({is, iu, y + sh_from});
        if (y != C{} || sh_to != C{}) t.push_back({js, ju, y + sh_to});
        if (y != C{}) {
          t.push_back({is, ju, -y});
          t.push_back({js, iu, -y});
        }
      }
    }
  }
  return ComplexMatrix::from_triplets(t, idx.size(), idx.size());
}

ComplexMatrix build_ybus3(const ThreePhaseNetwork& net) { return build_ybus3(net, PhaseIndexer(net)); }

LoadPower zip_load(const ZipLoad& l, double vm) noexcept {
  return {l.p_constant + l.p_current * vm + l.p_impedance * vm * vm,
          l.q_constant + l.q_current * vm + l.q_impedance * vm * vm};
}

LoadPower zip_load(const Bus3& bus, Phase phase, double vm) {
  if (!(vm >= 0.0)) throw std::invalid_argument("zip_load: voltage magnitude must be non-negative");
  return zip_load(bus.load(phase), vm);
}

VoltageState3 flat_start(const ThreePhaseNetwork& net, const PhaseIndexer& idx) {
  VoltageState3 v(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    v[k] = std::polar(net.source_vm, net.source_angle + nominal_angle(idx.node(k).phase));
  }
  return v;
}

namespace {

bool finite_block(const Block3& b) {
  for (const auto& row : b)
    for (const C& v : row)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

/// Gaussian elimination with partial pivoting on the present-phase sub-block.
bool nonsingular(const Block3& b, PhaseSet phases) {
  const auto ph = phases.phases();
  const std::size_t n = ph.size();
  std::array<std::array<C, 3>, 3> m{};
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      m[i][j] = b[static_cast<std::size_t>(ph[i])][static_cast<std::size_t>(ph[j])];
      scale = std::max(scale, std::abs(m[i][j]));
    }
  if (scale == 0.0) return n == 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
    if (std::abs(m[piv][k]) <= 1e-14 * scale) return false;
    std::swap(m[k], m[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const C f = m[i][k] / m[k][k];
      for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
    }
  }
  return true;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

ValidationReport validate_network(const ThreePhaseNetwork& net) {
  ValidationReport report;
  const auto add = [&](ViolationKind kind, std::string location, std::string message) {
    report.violations.push_back({kind, std::move(location), std::move(message)});
  };

  std::unordered_map<std::size_t, std::size_t> pos;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    const Bus3& b = net.buses[i];
    const std::string loc = "network.buses[" + std::to_string(i) + "]";
    if (!pos.emplace(b.id, i).second) add(ViolationKind::duplicate_bus, loc + ".id", "duplicate bus id " + std::to_string(b.id));
    if (b.phases.empty()) add(ViolationKind::phase_mismatch, loc + ".phases", "bus has no phases");
    for (Phase p : kAllPhases) {
      const ZipLoad& l = b.load(p);
      for (double v : {l.p_constant, l.p_current, l.p_impedance, l.q_constant, l.q_current, l.q_impedance}) {
        if (!std::isfinite(v)) {
          add(ViolationKind::non_finite, loc + ".loads." + phase_letter(p), "non-finite ZIP coefficient");
          break;
        }
      }
      if (!b.phases.has(p) && !l.is_zero()) {
        add(ViolationKind::phase_mismatch, loc + ".loads." + phase_letter(p),
            "load on phase " + std::string(1, phase_letter(p)) + " which the bus does not have");
      }
    }
  }

  const auto src = pos.find(net.source_bus);
  if (src == pos.end()) {
    add(ViolationKind::bad_source, "network.source_bus", "source bus " + std::to_string(net.source_bus) + " does not exist");
  } else if (!(net.buses[src->second].phases == PhaseSet::all())) {
    add(ViolationKind::bad_source, "network.source_bus", "source bus must carry all three phases");
  }
  if (!std::isfinite(net.source_vm) || !(net.source_vm > 0.0) || !std::isfinite(net.source_angle)) {
    add(ViolationKind::bad_setpoint, "network.source_voltage", "source voltage must be positive and finite");
  }
  if (!std::isfinite(net.base_mva) || !(net.base_mva > 0.0)) {
    add(ViolationKind::non_finite, "network.base_mva", "base_mva must be positive and finite");
  }

  std::vector<std::size_t> parent(net.buses.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t k = 0; k < net.branches.size(); ++k) {
    const Branch3& br = net.branches[k];
    const std::string loc = "network.branches[" + std::to_string(k) + "]";
    const auto f = pos.find(br.from);
    const auto g = pos.find(br.to);
    if (f == pos.end()) add(ViolationKind::dangling_endpoint, loc + ".from", "unknown bus id " + std::to_string(br.from));
    if (g == pos.end()) add(ViolationKind::dangling_endpoint, loc + ".to", "unknown bus id " + std::to_string(br.to));
    if (br.from == br.to) add(ViolationKind::self_loop, loc, "branch connects bus " + std::to_string(br.from) + " to itself");
    if (br.phases.empty()) add(ViolationKind::phase_mismatch, loc + ".phases", "branch has no phases");
    if (f != pos.end() && !br.phases.subset_of(net.buses[f->second].phases)) {
      add(ViolationKind::phase_mismatch, loc + ".phases", "branch phases are not present at bus " + std::to_string(br.from));
    }
    if (g != pos.end() && !br.phases.subset_of(net.buses[g->second].phases)) {
      add(ViolationKind::phase_mismatch, loc + ".phases", "branch phases are not present at bus " + std::to_string(br.to));
    }
    const bool finite = finite_block(br.y_series) && (!br.y_shunt_from || finite_block(*br.y_shunt_from)) &&
                        (!br.y_shunt_to || finite_block(*br.y_shunt_to));
    if (!finite) {
      add(ViolationKind::non_finite, loc, "non-finite admittance entry");
    } else if (!br.phases.empty() && !nonsingular(br.y_series, br.phases)) {
      add(ViolationKind::zero_impedance, loc + ".y_series", "series admittance is singular on the branch phases");
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
