#include "gridflow/io/solution.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace gridflow {

using json = nlohmann::json;

OutputFormat parse_output_format(std::string_view name) {
  if (name == "json") return OutputFormat::json;
  if (name == "csv") return OutputFormat::csv;
  throw std::invalid_argument("unknown output format '" + std::string(name) + "' (expected json or csv)");
}

namespace {

constexpr double kDegrees = 180.0 / std::numbers::pi;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  // "-0.000" reads as a sign error; print rounded zeros unsigned.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

json common_fields(bool converged, std::size_t iterations, const std::vector<double>& mismatch,
                   const std::vector<double>& updates, const SolveTimings& t, std::size_t fallbacks,
                   std::size_t krylov_iterations) {
  return {{"converged", converged},
          {"iterations", iterations},
          {"mismatch_history", mismatch},
          {"update_history", updates},
          {"timings", {{"jacobian_build_s", t.jacobian_build}, {"linear_solve_s", t.linear_solve}, {"mismatch_eval_s", t.mismatch_eval}}},
          {"krylov_fallbacks", fallbacks},
          {"krylov_iterations", krylov_iterations}};
}

}  // namespace

std::string write_solution(const PowerFlowSolution& sol, const SinglePhaseNetwork& net, OutputFormat format) {
  if (sol.state.size() != net.size()) throw DimensionError("write_solution: state does not match the network");
  if (format == OutputFormat::csv) {
    std::string out = "bus,vm_pu,va_deg\n";
    for (std::size_t i = 0; i < net.size(); ++i) {
      out += std::to_string(net.buses[i].id) + "," + fixed(sol.state.magnitude[i], 6) + "," +
             fixed(sol.state.angle[i] * kDegrees, 3) + "\n";
    }
    return out;
  }
  json doc = common_fields(sol.converged, sol.iterations, sol.mismatch_history, sol.update_history, sol.timings,
                           sol.krylov_fallbacks, sol.krylov_iterations);
  doc["kind"] = "single_phase";
  json buses = json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    buses.push_back({{"bus", net.buses[i].id},
                     {"vm_pu", sol.state.magnitude[i]},
                     {"va_rad", sol.state.angle[i]},
                     {"va_deg", sol.state.angle[i] * kDegrees}});
  }
  doc["buses"] = std::move(buses);
  return doc.dump(2) + "\n";
}

std::string write_solution(const ThreePhaseSolution& sol, const ThreePhaseNetwork& net, OutputFormat format) {
  const PhaseIndexer& idx = sol.indexer;
  if (sol.state.size() != idx.size()) throw DimensionError("write_solution: state does not match the network");
  if (format == OutputFormat::csv) {
    std::string out = "bus,phase,vm_pu,va_deg\n";
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto& node = idx.node(k);
      out += std::to_string(net.buses[node.bus].id) + "," + phase_letter(node.phase) + "," +
             fixed(std::abs(sol.state[k]), 6) + "," + fixed(std::arg(sol.state[k]) * kDegrees, 3) + "\n";
    }
    return out;
  }
  json doc = common_fields(sol.converged, sol.iterations, sol.mismatch_history, sol.update_history, sol.timings,
                           sol.krylov_fallbacks, sol.krylov_iterations);
  doc["kind"] = "three_phase";
  json nodes = json::array();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& node = idx.node(k);
    nodes.push_back({{"bus", net.buses[node.bus].id},
                     {"phase", std::string(1, phase_letter(node.phase))},
                     {"index", idx.report_index(k)},
                     {"re", sol.state[k].real()},
                     {"im", sol.state[k].imag()},
                     {"vm_pu", std::abs(sol.state[k])},
                     {"va_deg", std::arg(sol.state[k]) * kDegrees}});
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(2) + "\n";
}

}  // namespace gridflow
