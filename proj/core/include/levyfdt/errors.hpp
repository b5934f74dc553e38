#pragma once

#include <stdexcept>
#include <string>

namespace levyfdt {

/// Base of every exception thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad alpha, empty grid, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: instability, non-convergence, singular solve,
/// too many divergent trajectories.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A standing assumption on the model does not hold at some probe point.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace levyfdt
