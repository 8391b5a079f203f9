#include "gridflow/synth/synth.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "gridflow/powerflow/newton.hpp"

namespace gridflow {

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept {
  // Reject the top partial range so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

std::vector<std::size_t> SplitMix64::sample(std::size_t n, std::size_t count) {
  if (count > n) throw std::invalid_argument("sample: count exceeds population");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

void SynthSpec::validate() const {
  if (copies < 1) throw std::invalid_argument("synth: block/replica count must be at least 1");
  if (links_per_pair < 1) throw std::invalid_argument("synth: links per block pair must be at least 1");
}

namespace {

template <typename Buses>
std::size_t id_span(const Buses& buses) {
  std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
  for (const auto& b : buses) {
    lo = std::min(lo, b.id);
    hi = std::max(hi, b.id);
  }
  return buses.empty() ? 0 : hi - lo + 1;
}

struct Link {
  std::size_t from_block;
  std::size_t to_block;
  std::size_t base_branch;
};

/// The link draws, in the order replicate_transmission adds them.
std::vector<Link> sample_links(const SinglePhaseNetwork& base, const SynthSpec& spec) {
  std::vector<Link> links;
  SplitMix64 rng(spec.seed);
  const auto draw = [&](std::size_t k, std::size_t next) {
    for (std::size_t e : rng.sample(base.branches.size(), spec.links_per_pair)) links.push_back({k, next, e});
  };
  for (std::size_t k = 0; k + 1 < spec.copies; ++k) draw(k, k + 1);
  if (spec.ring && spec.copies > 2) draw(spec.copies - 1, 0);
  return links;
}

void check_transmission_inputs(const SinglePhaseNetwork& base, const SynthSpec& spec, const char* who) {
  spec.validate();
  const ValidationReport report = validate_network(base);
  if (!report.ok()) throw NetworkError(std::string(who) + ": invalid base network\n" + report.summary());
  if (spec.links_per_pair > base.branches.size()) {
    throw std::invalid_argument(std::string(who) + ": " + std::to_string(spec.links_per_pair) +
                                " links per pair exceeds the " + std::to_string(base.branches.size()) +
                                " base branches");
  }
}

PowerFlowSolution solve_base(const SinglePhaseNetwork& base, const char* who) {
  PowerFlowSolution solved = solve_nr(base, NewtonOptions{});
  if (!solved.converged) throw NetworkError(std::string(who) + ": the base case does not converge");
  return solved;
}

}  // namespace

SinglePhaseNetwork replicate_transmission(const SinglePhaseNetwork& base, const SynthSpec& spec) {
  check_transmission_inputs(base, spec, "replicate_transmission");
  if (spec.copies == 1) return base;

  std::size_t slack = 0;
  while (base.buses[slack].kind != BusKind::slack) ++slack;
  const PowerFlowSolution solved = solve_base(base, "replicate_transmission");
  const double slack_injection = calc_pq(build_ybus(base), solved.state).p[slack] + base.buses[slack].p_load;

  const std::size_t span = id_span(base.buses);
  SinglePhaseNetwork out;
  out.base_mva = base.base_mva;
  out.buses.reserve(base.buses.size() * spec.copies);
  out.branches.reserve(base.branches.size() * spec.copies + spec.links_per_pair * spec.copies);
  for (std::size_t k = 0; k < spec.copies; ++k) {
    for (std::size_t i = 0; i < base.buses.size(); ++i) {
      Bus b = base.buses[i];
      b.id += k * span;
      if (k > 0 && b.kind == BusKind::slack) {
        b.kind = BusKind::pv;
        b.p_gen = slack_injection;
      }
      out.buses.push_back(b);
    }
    for (Branch br : base.branches) {
      br.from += k * span;
      br.to += k * span;
      out.branches.push_back(br);
    }
  }

  for (const Link& l : sample_links(base, spec)) {
    Branch br = base.branches[l.base_branch];
    br.from += l.from_block * span;
    br.to += l.to_block * span;
    out.branches.push_back(br);
  }
  return out;
}

VoltageState replicated_start(const SinglePhaseNetwork& base, const SynthSpec& spec) {
  check_transmission_inputs(base, spec, "replicated_start");
  const VoltageState solved = solve_base(base, "replicated_start").state;
  if (spec.copies == 1) return solved;

  // A link from bus u of block k to bus v of block k+1 carries no active
  // power, to first order, when the blocks' angles differ by theta_u - theta_v.
  // Each block takes the susceptance-weighted mean over its incoming links.
  const auto pos = base.positions();
  std::vector<double> weighted(spec.copies, 0.0), weight(spec.copies, 0.0);
  for (const Link& l : sample_links(base, spec)) {
    if (l.to_block != l.from_block + 1) continue;  // the ring closure cannot be honoured as well
    const Branch& br = base.branches[l.base_branch];
    const double b = br.x / (br.r * br.r + br.x * br.x);
    weighted[l.to_block] += b * (solved.angle[pos.at(br.from)] - solved.angle[pos.at(br.to)]);
    weight[l.to_block] += b;
  }
  std::vector<double> offset(spec.copies, 0.0);
  for (std::size_t k = 1; k < spec.copies; ++k) {
    offset[k] = offset[k - 1] + (weight[k] != 0.0 ? weighted[k] / weight[k] : 0.0);
  }

  VoltageState out;
  out.magnitude.reserve(base.size() * spec.copies);
  out.angle.reserve(base.size() * spec.copies);
  for (std::size_t k = 0; k < spec.copies; ++k) {
    out.magnitude.insert(out.magnitude.end(), solved.magnitude.begin(), solved.magnitude.end());
    for (double a : solved.angle) out.angle.push_back(a + offset[k]);
  }
  return out;
}

ThreePhaseNetwork replicate_feeder(const ThreePhaseNetwork& base, const SynthSpec& spec) {
  spec.validate();
  const ValidationReport report = validate_network(base);
  if (!report.ok()) throw NetworkError("replicate_feeder: invalid base network\n" + report.summary());
  if (base.branches.size() + 1 != base.buses.size()) {
    throw NetworkError("replicate_feeder: the base feeder is not radial (" + std::to_string(base.buses.size()) +
                       " buses, " + std::to_string(base.branches.size()) + " branches)");
  }
  std::size_t source_branch = base.branches.size();
  std::size_t source_degree = 0;
  for (std::size_t k = 0; k < base.branches.size(); ++k) {
    if (base.branches[k].from == base.source_bus || base.branches[k].to == base.source_bus) {
      source_branch = k;
      ++source_degree;
    }
  }
  if (source_degree != 1) {
    throw NetworkError("replicate_feeder: the source bus must have exactly one branch, found " +
                       std::to_string(source_degree));
  }
  if (spec.copies == 1) return base;

  const Branch3& feed_branch = base.branches[source_branch];
  const std::size_t feed = feed_branch.from == base.source_bus ? feed_branch.to : feed_branch.from;
  const std::size_t span = id_span(base.buses);
  const auto shared = [&](std::size_t id) { return id == base.source_bus || id == feed; };
  const auto image = [&](std::size_t id, std::size_t k) { return shared(id) ? id : id + k * span; };

  ThreePhaseNetwork out = base;
  out.buses.clear();
  out.branches.clear();
  for (const Bus3& b : base.buses)
    if (shared(b.id)) out.buses.push_back(b);
  Branch3 scaled = feed_branch;
  const double n = static_cast<double>(spec.copies);
  for (auto& row : scaled.y_series)
    for (auto& v : row) v *= n;
  out.branches.push_back(scaled);

  for (std::size_t k = 0; k < spec.copies; ++k) {
    for (const Bus3& b : base.buses) {
      if (shared(b.id)) continue;
      Bus3 c = b;
      c.id = image(b.id, k);
      out.buses.push_back(c);
    }
    for (std::size_t e = 0; e < base.branches.size(); ++e) {
      if (e == source_branch) continue;
      Branch3 br = base.branches[e];
      br.from = image(br.from, k);
      br.to = image(br.to, k);
      out.branches.push_back(br);
    }
  }
  return out;
}

}  // namespace gridflow
