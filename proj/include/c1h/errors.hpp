#pragma once

#include <stdexcept>
#include <string>

namespace c1h {

// Bad input: arguments, files, configuration. CLI exit code 2.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parameter outside [0,1] or similar.
struct DomainError : ValidationError {
  using ValidationError::ValidationError;
};

struct GeometryError : ValidationError {
  using ValidationError::ValidationError;
};

// Numerical failures. CLI exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotAnalysisSuitable : NumericalError {
  NotAnalysisSuitable(const std::string& what, double residual)
      : NumericalError(what), residual(residual) {}
  double residual;
};

struct ConstructionError : NumericalError {
  using NumericalError::NumericalError;
};

struct SolverError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace c1h
