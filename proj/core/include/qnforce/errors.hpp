#pragma once

#include <stdexcept>
#include <string>

namespace qnforce {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration file or inconsistent case/parameter combination.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return what;
    return what + " (line " + std::to_string(line) + ", column " +
           std::to_string(column) + ")";
  }
  int line_;
  int column_;
};

// Movable plate reached or passed the fixed plate.
class PlateContactError : public Error {
 public:
  using Error::Error;
};

// Bias beyond pull-in: no stable equilibrium exists.
class UnstableBiasError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to converge.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Linear system singular to working precision; carries the offending pivot.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, double pivot_magnitude)
      : Error(what + " (pivot magnitude " + std::to_string(pivot_magnitude) +
              ")"),
        pivot_magnitude_(pivot_magnitude) {}
  double pivot_magnitude() const { return pivot_magnitude_; }

 private:
  double pivot_magnitude_;
};

// Evaluation exactly at a real pole of a response function.
class PoleSingularityError : public Error {
 public:
  using Error::Error;
};

// No signal transfer path (force coefficient identically zero).
class ZeroSignalError : public Error {
 public:
  using Error::Error;
};

// Coupling optimization degenerate at the requested target frequency.
class DegenerateOptimumError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Quadrature did not reach the requested tolerance; carries best estimate.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate,
                double error_estimate)
      : Error(what),
        best_estimate_(best_estimate),
        error_estimate_(error_estimate) {}
  double best_estimate() const { return best_estimate_; }
  double error_estimate() const { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

}  // namespace qnforce
