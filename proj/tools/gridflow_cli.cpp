// gridflow command-line front end: solve, synth and bench.
//
// Exit codes: 0 success, 1 the solver did not converge, 2 bad input
// (arguments or case file), 3 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gridflow/io/bench.hpp"
#include "gridflow/io/case.hpp"
#include "gridflow/io/solution.hpp"
#include "gridflow/powerflow/cim.hpp"
#include "gridflow/powerflow/newton.hpp"
#include "gridflow/synth/synth.hpp"

namespace {

using namespace gridflow;

enum ExitCode { kOk = 0, kNotConverged = 1, kInputError = 2, kInternalError = 3 };

/// Failure raised by argument checks that CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t default_threads() {
  if (const char* env = std::getenv("GRIDFLOW_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw UsageError("GRIDFLOW_THREADS must be a positive integer, got '" + std::string(env) + "'");
  }
  return 1;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text << std::flush;
  // The path was fine, so a failed write (disk full, I/O error) is not an input problem.
  if (!out) throw std::runtime_error("failed writing " + path);
}

VoltageState warm_start(const CaseFile& c, const std::string& base_path) {
  if (!std::holds_alternative<SinglePhaseNetwork>(c.network)) {
    throw UsageError("--warm-base applies to single-phase cases only");
  }
  return replicated_start(c, load_case(base_path));
}

struct SolveArgs {
  std::string case_path;
  std::string solver = "direct";
  std::size_t threads = 0;
  double tol = 1e-8;
  std::size_t max_iter = 0;
  std::string out = "json";
  std::string output;
  std::string warm_base;
};

int cmd_solve(const SolveArgs& a) {
  const CaseFile c = load_case(a.case_path);
  LinearSolverConfig linear;
  linear.kind = parse_solver_kind(a.solver);
  const OutputFormat format = parse_output_format(a.out);
  const std::size_t threads = a.threads > 0 ? a.threads : default_threads();
  bool converged = false;
  if (const auto* net = std::get_if<SinglePhaseNetwork>(&c.network)) {
    NewtonOptions o;
    o.linear = linear;
    o.tol_angle = o.tol_vm = a.tol;
    if (a.max_iter > 0) o.max_iter = a.max_iter;
    std::optional<VoltageState> start;
    if (!a.warm_base.empty()) {
      start = warm_start(c, a.warm_base);
      o.flat_start = false;
    }
    const PowerFlowSolution s = solve_nr(*net, o, threads, start ? &*start : nullptr);
    emit(write_solution(s, *net, format), a.output);
    converged = s.converged;
  } else {
    if (!a.warm_base.empty()) throw UsageError("--warm-base applies to single-phase cases only");
    const auto& feeder = std::get<ThreePhaseNetwork>(c.network);
    CimOptions o;
    o.linear = linear;
    o.tol_v = a.tol;
    if (a.max_iter > 0) o.max_iter = a.max_iter;
    const ThreePhaseSolution s = solve_cim(feeder, o, threads);
    emit(write_solution(s, feeder, format), a.output);
    converged = s.converged;
  }
  return converged ? kOk : kNotConverged;
}

struct SynthArgs {
  std::string base;
  std::size_t blocks = 0;
  std::size_t replicas = 0;
  std::size_t links = 2;
  std::uint64_t seed = 0;
  bool ring = false;
  std::string out;
  std::string name;
};

int cmd_synth(const SynthArgs& a) {
  const CaseFile base = load_case(a.base);
  SynthSpec spec;
  spec.links_per_pair = a.links;
  spec.seed = a.seed;
  spec.ring = a.ring;
  CaseFile out;
  out.metadata.source = "synthesized from " + base.metadata.name;
  if (const auto* net = std::get_if<SinglePhaseNetwork>(&base.network)) {
    if (a.replicas > 0) throw UsageError("--replicas applies to three-phase feeders; use --blocks");
    if (a.blocks == 0) throw UsageError("--blocks is required for a single-phase base case");
    spec.copies = a.blocks;
    out.network = replicate_transmission(*net, spec);
    out.metadata.name = base.metadata.name + "_x" + std::to_string(a.blocks);
  } else {
    if (a.blocks > 0) throw UsageError("--blocks applies to single-phase cases; use --replicas");
    if (a.replicas == 0) throw UsageError("--replicas is required for a three-phase base case");
    spec.copies = a.replicas;
    out.network = replicate_feeder(std::get<ThreePhaseNetwork>(base.network), spec);
    out.metadata.name = base.metadata.name + "_x" + std::to_string(a.replicas);
  }
  if (!a.name.empty()) out.metadata.name = a.name;
  out.metadata.synth = SynthRecord{base.metadata.name, spec};
  emit(write_case(out), a.out);
  return kOk;
}

struct BenchArgs {
  std::string case_path;
  std::string threads = "1,2,4,8";
  std::size_t repeat = 5;
  std::string solver = "krylov";
  double tol = 1e-8;
  std::string out = "csv";
  std::string output;
  std::string warm_base;
};

std::vector<std::size_t> parse_thread_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty() || v < 1) throw UsageError("invalid thread count '" + item + "' in --threads");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError("--threads needs at least one count");
  return out;
}

int cmd_bench(const BenchArgs& a) {
  if (a.out != "csv") throw UsageError("bench only writes csv");
  const CaseFile c = load_case(a.case_path);
  BenchOptions o;
  o.threads = parse_thread_list(a.threads);
  o.repeat = a.repeat;
  o.linear.kind = parse_solver_kind(a.solver);
  o.tol = a.tol;
  if (!a.warm_base.empty()) o.initial = warm_start(c, a.warm_base);
  const auto records = run_bench(c, o);
  emit(write_bench_csv(records), a.output);
  for (const auto& r : records)
    if (!r.converged) return kNotConverged;
  return kOk;
}

void report_error(bool as_json, int code, std::string_view kind, const std::string& message,
                  const std::string& location = {}) {
  if (as_json) {
    nlohmann::json err = {{"exit_code", code}, {"kind", kind}, {"message", message}};
    if (!location.empty()) err["location"] = location;
    std::cerr << nlohmann::json{{"error", err}}.dump() << "\n";
  } else {
    std::cerr << "gridflow: " << message << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel Newton power flow for transmission and distribution networks"};
  app.require_subcommand(1);
  bool error_json = false;
  app.add_flag("--error-json", error_json, "Report failures as one JSON object on stderr");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve a case file");
  s->add_option("--case", solve.case_path, "Case file (JSON)")->required();
  s->add_option("--solver", solve.solver, "Inner linear solver")->check(CLI::IsMember({"direct", "krylov"}));
  s->add_option("--threads", solve.threads, "Worker threads (default: GRIDFLOW_THREADS or 1)")->check(CLI::PositiveNumber);
  s->add_option("--tol", solve.tol, "Newton update tolerance (p.u. and rad)")->check(CLI::PositiveNumber);
  s->add_option("--max-iter", solve.max_iter, "Newton iteration cap")->check(CLI::PositiveNumber);
  s->add_option("--out", solve.out, "Output format")->check(CLI::IsMember({"json", "csv"}));
  s->add_option("-o,--output", solve.output, "Output file (default: stdout)");
  s->add_option("--warm-base", solve.warm_base, "Base case of a synthesized transmission case; start from its solution");

  SynthArgs synth;
  auto* y = app.add_subcommand("synth", "Synthesize a larger case by replication");
  y->add_option("--base", synth.base, "Base case file")->required();
  y->add_option("--blocks", synth.blocks, "Transmission blocks")->check(CLI::PositiveNumber);
  y->add_option("--replicas", synth.replicas, "Feeder replicas")->check(CLI::PositiveNumber);
  y->add_option("--links", synth.links, "Random links per adjacent block pair")->check(CLI::PositiveNumber);
  y->add_option("--seed", synth.seed, "Seed for link sampling");
  y->add_flag("--ring", synth.ring, "Also link the last block to the first");
  y->add_option("--name", synth.name, "Name of the synthesized case");
  y->add_option("--out", synth.out, "Output case file")->required();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Thread sweep with median timings");
  b->add_option("--case", bench.case_path, "Case file (JSON)")->required();
  b->add_option("--threads", bench.threads, "Comma-separated thread counts");
  b->add_option("--repeat", bench.repeat, "Repeats per thread count")->check(CLI::PositiveNumber);
  b->add_option("--solver", bench.solver, "Inner linear solver")->check(CLI::IsMember({"direct", "krylov"}));
  b->add_option("--tol", bench.tol, "Newton update tolerance")->check(CLI::PositiveNumber);
  b->add_option("--out", bench.out, "Output format")->check(CLI::IsMember({"csv"}));
  b->add_option("-o,--output", bench.output, "Output file (default: stdout)");
  b->add_option("--warm-base", bench.warm_base, "Base case of a synthesized transmission case; start from its solution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(error_json, kInputError, "usage", e.what());
    return kInputError;
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*y) return cmd_synth(synth);
    return cmd_bench(bench);
  } catch (const CaseError& e) {
    report_error(error_json, kInputError, std::string(to_string(e.kind())) + "_error", e.what(), e.location());
    return kInputError;
  } catch (const UsageError& e) {
    report_error(error_json, kInputError, "usage", e.what());
    return kInputError;
  } catch (const std::invalid_argument& e) {
    report_error(error_json, kInputError, "usage", e.what());
    return kInputError;
  } catch (const NetworkError& e) {
    report_error(error_json, kInputError, "network", e.what());
    return kInputError;
  } catch (const SingularJacobianError& e) {
    report_error(error_json, kNotConverged, "singular_jacobian", e.what());
    return kNotConverged;
  } catch (const NearZeroVoltageError& e) {
    report_error(error_json, kNotConverged, "voltage_collapse", e.what());
    return kNotConverged;
  } catch (const KrylovNotConvergedError& e) {
    report_error(error_json, kNotConverged, "krylov_not_converged", e.what());
    return kNotConverged;
  } catch (const KrylovBreakdownError& e) {
    report_error(error_json, kNotConverged, "krylov_breakdown", e.what());
    return kNotConverged;
  } catch (const std::exception& e) {
    report_error(error_json, kInternalError, "internal", e.what());
    return kInternalError;
  }
}
