#include "gridflow/io/bench.hpp"

#include <algorithm>
#include <json.hpp>
#include <stdexcept>

#include "gridflow/powerflow/cim.hpp"
#include "gridflow/powerflow/newton.hpp"

namespace gridflow {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

struct Run {
  std::size_t iterations;
  bool converged;
  SolveTimings timings;
};

Run solve_once(const CaseFile& c, const BenchOptions& opts, std::size_t threads) {
  if (const auto* net = std::get_if<SinglePhaseNetwork>(&c.network)) {
    NewtonOptions o;
    o.linear = opts.linear;
    o.tol_angle = o.tol_vm = opts.tol;
    if (opts.max_iter > 0) o.max_iter = opts.max_iter;
    if (opts.initial) o.flat_start = false;
    const PowerFlowSolution s = solve_nr(*net, o, threads, opts.initial ? &*opts.initial : nullptr);
    return {s.iterations, s.converged, s.timings};
  }
  CimOptions o;
  o.linear = opts.linear;
  o.tol_v = opts.tol;
  if (opts.max_iter > 0) o.max_iter = opts.max_iter;
  const ThreePhaseSolution s = solve_cim(std::get<ThreePhaseNetwork>(c.network), o, threads);
  return {s.iterations, s.converged, s.timings};
}

}  // namespace

std::vector<BenchRecord> run_bench(const CaseFile& c, const BenchOptions& opts) {
  if (opts.repeat < 1) throw std::invalid_argument("bench: repeat must be at least 1");
  if (opts.threads.empty()) throw std::invalid_argument("bench: no thread counts given");
  std::vector<BenchRecord> out;
  for (std::size_t t : opts.threads) {
    if (t < 1) throw std::invalid_argument("bench: thread counts must be at least 1");
    std::vector<double> solve, other;
    BenchRecord rec{c.metadata.name, c.bus_count(), opts.linear.kind, t, 0, 0.0, 0.0, false};
    for (std::size_t r = 0; r < opts.repeat; ++r) {
      const Run run = solve_once(c, opts, t);
      if (r == 0) {
        rec.iterations = run.iterations;
        rec.converged = run.converged;
      } else if (run.iterations != rec.iterations || run.converged != rec.converged) {
        throw std::logic_error("bench: repeats disagree on iteration count or convergence");
      }
      solve.push_back(run.timings.linear_solve);
      other.push_back(run.timings.other());
    }
    rec.solve_time = median(solve);
    rec.other_time = median(other);
    out.push_back(std::move(rec));
  }
  return out;
}

std::string write_bench_csv(const std::vector<BenchRecord>& records) {
  std::string out = "case,buses,solver,threads,iterations,solve_time_s,other_time_s,converged\n";
  for (const auto& r : records) {
    // Case names are free text; quote them the way CSV readers expect.
    std::string name = r.case_name;
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char ch : name) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      name = q + "\"";
    }
    out += name + "," + std::to_string(r.bus_count) + "," + std::string(to_string(r.solver)) + "," +
           std::to_string(r.thread_count) + "," + std::to_string(r.iterations) + "," +
           nlohmann::json(r.solve_time).dump() + "," + nlohmann::json(r.other_time).dump() + "," +
           (r.converged ? "true" : "false") + "\n";
  }
  return out;
}

}  // namespace gridflow
