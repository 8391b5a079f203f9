#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gridflow/io/case.hpp"
#include "gridflow/linear/config.hpp"

namespace gridflow {

/// One row of the thread sweep. Times are medians over the repeats, in
/// seconds: solve_time is the inner linear solves, other_time the Jacobian
/// assembly and mismatch evaluations.
struct BenchRecord {
  std::string case_name;
  std::size_t bus_count = 0;
  SolverKind solver = SolverKind::krylov;
  std::size_t thread_count = 1;
  std::size_t iterations = 0;
  double solve_time = 0.0;
  double other_time = 0.0;
  bool converged = false;
};

struct BenchOptions {
  std::vector<std::size_t> threads{1, 2, 4, 8};
  std::size_t repeat = 5;
  LinearSolverConfig linear{.kind = SolverKind::krylov};
  double tol = 1e-8;
  std::size_t max_iter = 0;  // 0: the solver's default
  /// Single-phase cases only: start Newton here instead of from flat start.
  std::optional<VoltageState> initial;
};

/// Solves the case repeat times per thread count. Throws std::logic_error if
/// iteration counts or convergence flags differ between repeats.
std::vector<BenchRecord> run_bench(const CaseFile& c, const BenchOptions& opts);

/// Header: case,buses,solver,threads,iterations,solve_time_s,other_time_s,converged
std::string write_bench_csv(const std::vector<BenchRecord>& records);

/// Median of a non-empty sample.
double median(std::vector<double> values);

}  // namespace gridflow
