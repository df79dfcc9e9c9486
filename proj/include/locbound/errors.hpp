#pragma once

#include <stdexcept>
#include <string>

namespace locbound {

/// Adaptive quadrature exhausted its subdivision budget before reaching the
/// requested tolerance. Carries the best estimate seen so far and the error
/// bound attached to it, so callers can decide whether the partial result is
/// still usable.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double best_estimate, double error_bound)
      : std::runtime_error(what), best_estimate_(best_estimate), error_bound_(error_bound) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_bound() const noexcept { return error_bound_; }

private:
  double best_estimate_;
  double error_bound_;
};

/// Matrix handed to cholesky() is not positive definite.
class NotPsdError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Fisher information is singular (single sensor or all sensors collinear
/// with the source).
class SingularGeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A sensor coincides exactly with the source.
class DegenerateGeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An operation that needs data received none (e.g. empty sensor list).
class InsufficientDataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Configuration would allocate an absurd amount of work (guard rail, not a
/// tuning knob).
class ResourceLimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Experiment-config text failed to parse or validate. The message lists
/// every violation with its line number.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace locbound
