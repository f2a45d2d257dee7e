#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rotd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Config file rejected; `line` is 0 when no single line is at fault.
class ConfigError : public Error {
 public:
  ConfigError(std::string message, int line_number = 0)
      : Error(line_number > 0 ? "line " + std::to_string(line_number) + ": " + message
                              : std::move(message)),
        line(line_number) {}
  int line;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Feature Gram matrix is rank deficient: the basis columns are linearly
/// dependent under the sampling distribution.
class RankError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  SingularSystemError(std::string message, double condition_estimate)
      : Error(std::move(message)), condition(condition_estimate) {}
  double condition;
};

/// A solver iterate went non-finite at `iteration`.
class DivergenceError : public Error {
 public:
  DivergenceError(std::int64_t at_iteration)
      : Error("solver diverged at iteration " + std::to_string(at_iteration)),
        iteration(at_iteration) {}
  std::int64_t iteration;
};

/// Iterative reference computation hit its cap; carries the best value seen.
class NumericError : public Error {
 public:
  NumericError(std::string message, double best_value)
      : Error(std::move(message)), best_objective(best_value) {}
  double best_objective;
};

}  // namespace rotd
