#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridflow {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or index ranges do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// No acceptable pivot was found while factorizing.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(std::size_t column, const std::string& what)
      : Error(what), column_(column) {}

  /// Column of the input matrix that failed to pivot.
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

/// BiCGSTAB hit a vanishing rho or omega.
class KrylovBreakdownError : public Error {
 public:
  using Error::Error;
};

/// BiCGSTAB ran out of iterations; the Newton drivers treat this as a cue to
/// retry the step with the direct solver.
class KrylovNotConvergedError : public Error {
 public:
  KrylovNotConvergedError(std::size_t iterations, double relative_residual, const std::string& what)
      : Error(what), iterations_(iterations), relative_residual_(relative_residual) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double relative_residual() const noexcept { return relative_residual_; }

 private:
  std::size_t iterations_;
  double relative_residual_;
};

/// The Newton Jacobian could not be factorized at some iteration.
class SingularJacobianError : public SingularMatrixError {
 public:
  SingularJacobianError(std::size_t iteration, std::size_t column, const std::string& what)
      : SingularMatrixError(column, what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// A phase-node voltage collapsed towards zero, which only happens when the
/// current-injection iteration is diverging.
class NearZeroVoltageError : public Error {
 public:
  NearZeroVoltageError(std::size_t node, const std::string& what) : Error(what), node_(node) {}

  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Network data violates a structural rule (see the validation reports).
class NetworkError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridflow
