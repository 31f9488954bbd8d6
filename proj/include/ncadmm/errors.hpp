#pragma once

#include <stdexcept>
#include <string>

namespace ncadmm {

/// Base class for every error the library throws on its own behalf.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Mismatched or inconsistent dimensions in problem data.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

/// A validation check failed hard (Lipschitz violation, rank deficiency, ...).
/// The message carries the witness that triggered the failure.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A function or gradient evaluation produced a non-finite value.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

/// An iterative inner solver hit its iteration cap before reaching tolerance.
class InnerSolveError : public Error {
 public:
  InnerSolveError(const std::string& what, double residual, long iterations)
      : Error(what), residual(residual), iterations(iterations) {}
  double residual;
  long iterations;
};

/// A run configuration file could not be parsed or is inconsistent. The
/// message starts with "path:line:" when the offending line is known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Penalty parameters fail the calibration conditions and no override was set.
class CalibrationError : public Error {
 public:
  explicit CalibrationError(const std::string& what) : Error(what) {}
};

/// A runtime convergence check failed while check_level was "full".
class CheckViolationError : public Error {
 public:
  CheckViolationError(const std::string& what, long iteration, std::string check)
      : Error(what), iteration(iteration), check(std::move(check)) {}
  long iteration;
  std::string check;
};

}  // namespace ncadmm
