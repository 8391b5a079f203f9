#pragma once

#include <chrono>

namespace gridflow {

/// Wall-clock split of a Newton solve, in seconds. "Other" time in the
/// benchmark is jacobian_build + mismatch_eval.
struct SolveTimings {
  double jacobian_build = 0.0;
  double linear_solve = 0.0;
  double mismatch_eval = 0.0;

  double other() const noexcept { return jacobian_build + mismatch_eval; }
  double total() const noexcept { return jacobian_build + linear_solve + mismatch_eval; }
};

/// Adds the elapsed time to a SolveTimings field when it goes out of scope.
class ScopedTimer {
 public:
  explicit ScopedTimer(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() { sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace gridflow
