#include "gridflow/io/case.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gridflow {

using json = nlohmann::json;
using C = std::complex<double>;

std::string_view to_string(CaseKind kind) noexcept {
  return kind == CaseKind::single_phase ? "single_phase" : "three_phase";
}

std::size_t CaseFile::bus_count() const noexcept {
  return std::visit([](const auto& net) { return net.buses.size(); }, network);
}

std::string_view to_string(CaseError::Kind kind) noexcept {
  switch (kind) {
    case CaseError::Kind::syntax: return "syntax";
    case CaseError::Kind::schema: return "schema";
    case CaseError::Kind::semantic: return "semantic";
  }
  return "schema";
}

CaseError::CaseError(Kind kind, std::string location, const std::string& message)
    : Error(std::string(to_string(kind)) + " error at " + location + ": " + message),
      kind_(kind),
      location_(std::move(location)),
      detail_(message) {}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
  throw CaseError(CaseError::Kind::schema, path, message);
}

/// Cursor over a JSON value that remembers its path for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : v_(value), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }
  const json& raw() const noexcept { return v_; }

  /// Requires an object whose keys all appear in `required` or `optional`.
  void expect_object(std::initializer_list<std::string_view> required,
                     std::initializer_list<std::string_view> optional = {}) const {
    if (!v_.is_object()) schema_error(path_, "expected an object");
    for (const auto& [key, _] : v_.items()) {
      const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                         std::find(optional.begin(), optional.end(), key) != optional.end();
      if (!known) schema_error(child_path(key), "unknown key");
    }
    for (std::string_view key : required) {
      if (!v_.contains(std::string(key))) schema_error(child_path(std::string(key)), "missing required key");
    }
  }

  bool has(const std::string& key) const { return v_.contains(key); }
  Node operator[](const std::string& key) const { return Node(v_.at(key), child_path(key)); }
  Node operator[](std::size_t i) const { return Node(v_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  std::size_t array_size(std::optional<std::size_t> exact = std::nullopt) const {
    if (!v_.is_array()) schema_error(path_, "expected an array");
    if (exact && v_.size() != *exact) schema_error(path_, "expected " + std::to_string(*exact) + " elements");
    return v_.size();
  }

  double number() const {
    if (!v_.is_number()) schema_error(path_, "expected a number");
    const double d = v_.get<double>();
    if (!std::isfinite(d)) schema_error(path_, "number must be finite");
    return d;
  }

  std::size_t index() const {
    if (v_.is_number_unsigned()) return v_.get<std::size_t>();
    if (v_.is_number_integer()) {
      if (v_.get<std::int64_t>() < 0) schema_error(path_, "expected a non-negative integer");
      return static_cast<std::size_t>(v_.get<std::int64_t>());
    }
    schema_error(path_, "expected a non-negative integer");
  }

  std::uint64_t u64() const {
    if (v_.is_number_unsigned() || (v_.is_number_integer() && v_.get<std::int64_t>() >= 0)) {
      return v_.get<std::uint64_t>();
    }
    schema_error(path_, "expected a non-negative integer");
  }

  bool boolean() const {
    if (!v_.is_boolean()) schema_error(path_, "expected true or false");
    return v_.get<bool>();
  }

  std::string string() const {
    if (!v_.is_string()) schema_error(path_, "expected a string");
    return v_.get<std::string>();
  }

 private:
  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& v_;
  std::string path_;
};

double optional_number(const Node& n, const std::string& key, double fallback) {
  return n.has(key) ? n[key].number() : fallback;
}

Bus read_bus(const Node& n) {
  n.expect_object({"id", "type"}, {"p_load", "q_load", "p_gen", "v_setpoint", "shunt_g", "shunt_b"});
  Bus b;
  b.id = n["id"].index();
  try {
    b.kind = parse_bus_kind(n["type"].string());
  } catch (const std::invalid_argument& e) {
    schema_error(n["type"].path(), e.what());
  }
  b.p_load = optional_number(n, "p_load", 0.0);
  b.q_load = optional_number(n, "q_load", 0.0);
  b.p_gen = optional_number(n, "p_gen", 0.0);
  b.v_setpoint = optional_number(n, "v_setpoint", 1.0);
  b.shunt_g = optional_number(n, "shunt_g", 0.0);
  b.shunt_b = optional_number(n, "shunt_b", 0.0);
  return b;
}

Branch read_branch(const Node& n) {
  n.expect_object({"from", "to", "r", "x"}, {"b"});
  return Branch{n["from"].index(), n["to"].index(), n["r"].number(), n["x"].number(), optional_number(n, "b", 0.0)};
}

SinglePhaseNetwork read_single_phase(const Node& n) {
  n.expect_object({"base_mva", "buses", "branches"});
  SinglePhaseNetwork net;
  net.base_mva = n["base_mva"].number();
  const Node buses = n["buses"];
  for (std::size_t i = 0; i < buses.array_size(); ++i) net.buses.push_back(read_bus(buses[i]));
  const Node branches = n["branches"];
  for (std::size_t i = 0; i < branches.array_size(); ++i) net.branches.push_back(read_branch(branches[i]));
  return net;
}

PhaseSet read_phases(const Node& n) {
  try {
    const PhaseSet s = PhaseSet::parse(n.string());
    if (s.empty()) schema_error(n.path(), "at least one phase is required");
    return s;
  } catch (const std::invalid_argument& e) {
    schema_error(n.path(), e.what());
  }
}

ZipLoad read_zip(const Node& n) {
  n.expect_object({"p", "q"});
  const Node p = n["p"];
  const Node q = n["q"];
  p.array_size(3);
  q.array_size(3);
  return ZipLoad{p[0].number(), p[1].number(), p[2].number(), q[0].number(), q[1].number(), q[2].number()};
}

Block3 read_block(const Node& n) {
  Block3 b{};
  n.array_size(3);
  for (std::size_t i = 0; i < 3; ++i) {
    const Node row = n[i];
    row.array_size(3);
    for (std::size_t j = 0; j < 3; ++j) {
      const Node cell = row[j];
      cell.array_size(2);
      b[i][j] = C(cell[0].number(), cell[1].number());
    }
  }
  return b;
}

Bus3 read_bus3(const Node& n) {
  n.expect_object({"id", "phases"}, {"loads"});
  Bus3 b;
  b.id = n["id"].index();
  b.phases = read_phases(n["phases"]);
  if (n.has("loads")) {
    const Node loads = n["loads"];
    loads.expect_object({}, {"a", "b", "c"});
    for (Phase p : kAllPhases) {
      const std::string key(1, phase_letter(p));
      if (loads.has(key)) b.loads[static_cast<std::size_t>(p)] = read_zip(loads[key]);
    }
  }
  return b;
}

Branch3 read_branch3(const Node& n) {
  n.expect_object({"from", "to", "phases", "y_series"}, {"y_shunt_from", "y_shunt_to"});
  Branch3 br;
  br.from = n["from"].index();
  br.to = n["to"].index();
  br.phases = read_phases(n["phases"]);
  br.y_series = read_block(n["y_series"]);
  if (n.has("y_shunt_from")) br.y_shunt_from = read_block(n["y_shunt_from"]);
  if (n.has("y_shunt_to")) br.y_shunt_to = read_block(n["y_shunt_to"]);
  return br;
}

ThreePhaseNetwork read_three_phase(const Node& n) {
  n.expect_object({"base_mva", "source_bus", "source_voltage", "buses", "branches"});
  ThreePhaseNetwork net;
  net.base_mva = n["base_mva"].number();
  net.source_bus = n["source_bus"].index();
  const Node sv = n["source_voltage"];
  sv.expect_object({"magnitude", "angle"});
  net.source_vm = sv["magnitude"].number();
  net.source_angle = sv["angle"].number();
  const Node buses = n["buses"];
  for (std::size_t i = 0; i < buses.array_size(); ++i) net.buses.push_back(read_bus3(buses[i]));
  const Node branches = n["branches"];
  for (std::size_t i = 0; i < branches.array_size(); ++i) net.branches.push_back(read_branch3(branches[i]));
  return net;
}

CaseMetadata read_metadata(const Node& n) {
  n.expect_object({"name"}, {"source", "synth"});
  CaseMetadata m;
  m.name = n["name"].string();
  if (n.has("source")) m.source = n["source"].string();
  if (n.has("synth")) {
    const Node s = n["synth"];
    s.expect_object({"base", "copies", "seed"}, {"links_per_pair", "ring"});
    SynthRecord r;
    r.base = s["base"].string();
    r.spec.copies = s["copies"].index();
    r.spec.seed = s["seed"].u64();
    if (s.has("links_per_pair")) r.spec.links_per_pair = s["links_per_pair"].index();
    if (s.has("ring")) r.spec.ring = s["ring"].boolean();
    m.synth = r;
  }
  return m;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

json block_json(const Block3& b) {
  json out = json::array();
  for (const auto& row : b) {
    json r = json::array();
    for (const C& v : row) r.push_back(json::array({v.real(), v.imag()}));
    out.push_back(std::move(r));
  }
  return out;
}

json network_json(const SinglePhaseNetwork& net) {
  json buses = json::array();
  for (const Bus& b : net.buses) {
    buses.push_back({{"id", b.id},
                     {"type", std::string(to_string(b.kind))},
                     {"p_load", b.p_load},
                     {"q_load", b.q_load},
                     {"p_gen", b.p_gen},
                     {"v_setpoint", b.v_setpoint},
                     {"shunt_g", b.shunt_g},
                     {"shunt_b", b.shunt_b}});
  }
  json branches = json::array();
  for (const Branch& br : net.branches) {
    branches.push_back({{"from", br.from}, {"to", br.to}, {"r", br.r}, {"x", br.x}, {"b", br.b_charging}});
  }
  return {{"base_mva", net.base_mva}, {"buses", std::move(buses)}, {"branches", std::move(branches)}};
}

json network_json(const ThreePhaseNetwork& net) {
  json buses = json::array();
  for (const Bus3& b : net.buses) {
    json entry = {{"id", b.id}, {"phases", b.phases.letters()}};
    json loads = json::object();
    for (Phase p : kAllPhases) {
      const ZipLoad& l = b.load(p);
      if (l.is_zero()) continue;
      loads[std::string(1, phase_letter(p))] = {
          {"p", json::array({l.p_constant, l.p_current, l.p_impedance})},
          {"q", json::array({l.q_constant, l.q_current, l.q_impedance})}};
    }
    if (!loads.empty()) entry["loads"] = std::move(loads);
    buses.push_back(std::move(entry));
  }
  json branches = json::array();
  for (const Branch3& br : net.branches) {
    json entry = {{"from", br.from}, {"to", br.to}, {"phases", br.phases.letters()}, {"y_series", block_json(br.y_series)}};
    if (br.y_shunt_from) entry["y_shunt_from"] = block_json(*br.y_shunt_from);
    if (br.y_shunt_to) entry["y_shunt_to"] = block_json(*br.y_shunt_to);
    branches.push_back(std::move(entry));
  }
  return {{"base_mva", net.base_mva},
          {"source_bus", net.source_bus},
          {"source_voltage", {{"magnitude", net.source_vm}, {"angle", net.source_angle}}},
          {"buses", std::move(buses)},
          {"branches", std::move(branches)}};
}

/// Maps the first violation of a report onto a semantic CaseError.
void raise_semantic(const ValidationReport& report) {
  if (report.ok()) return;
  const Violation& v = report.violations.front();
  std::string message = v.message;
  if (report.violations.size() > 1) {
    message += " (and " + std::to_string(report.violations.size() - 1) + " more)";
  }
  throw CaseError(CaseError::Kind::semantic, v.location, message);
}

}  // namespace

CaseFile parse_case(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte == 0 ? 0 : e.byte - 1;
    throw CaseError(CaseError::Kind::syntax, line_column(text, at), e.what());
  }

  const Node root(doc, "");
  root.expect_object({"format_version", "kind", "metadata", "network"});
  CaseFile c;
  c.format_version = root["format_version"].string();
  if (c.format_version != kCaseFormatVersion) {
    schema_error("format_version", "unsupported version '" + c.format_version + "' (expected " +
                                       std::string(kCaseFormatVersion) + ")");
  }
  c.metadata = read_metadata(root["metadata"]);
  const std::string kind = root["kind"].string();
  if (kind == "single_phase") {
    auto net = read_single_phase(root["network"]);
    raise_semantic(validate_network(net));
    c.network = std::move(net);
  } else if (kind == "three_phase") {
    auto net = read_three_phase(root["network"]);
    raise_semantic(validate_network(net));
    c.network = std::move(net);
  } else {
    schema_error("kind", "expected single_phase or three_phase");
  }
  return c;
}

std::string write_case(const CaseFile& c) {
  json meta = {{"name", c.metadata.name}};
  if (!c.metadata.source.empty()) meta["source"] = c.metadata.source;
  if (c.metadata.synth) {
    const SynthRecord& s = *c.metadata.synth;
    meta["synth"] = {{"base", s.base},
                     {"copies", s.spec.copies},
                     {"links_per_pair", s.spec.links_per_pair},
                     {"seed", s.spec.seed},
                     {"ring", s.spec.ring}};
  }
  const json doc = {{"format_version", c.format_version},
                    {"kind", std::string(to_string(c.kind()))},
                    {"metadata", std::move(meta)},
                    {"network", std::visit([](const auto& net) { return network_json(net); }, c.network)}};
  return doc.dump(2) + "\n";
}

CaseFile load_case(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaseError(CaseError::Kind::syntax, path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

VoltageState replicated_start(const CaseFile& synthesized, const CaseFile& base) {
  if (!synthesized.metadata.synth) {
    throw std::invalid_argument("warm start needs a synthesized case (metadata.synth is missing)");
  }
  const SynthRecord& record = *synthesized.metadata.synth;
  const auto* net = std::get_if<SinglePhaseNetwork>(&synthesized.network);
  const auto* base_net = std::get_if<SinglePhaseNetwork>(&base.network);
  if (!net || !base_net) throw std::invalid_argument("warm start applies to single-phase cases only");
  if (base.metadata.name != record.base) {
    throw std::invalid_argument("warm start: case '" + base.metadata.name + "' is not the base case '" + record.base +
                                "'");
  }
  if (base_net->size() * record.spec.copies != net->size()) {
    throw std::invalid_argument("warm start: bus count does not match " + std::to_string(record.spec.copies) +
                                " copies of the base");
  }
  return replicated_start(*base_net, record.spec);
}

}  // namespace gridflow
