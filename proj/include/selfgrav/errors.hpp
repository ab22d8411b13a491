#pragma once

#include <stdexcept>
#include <string>

namespace selfgrav {

/// Raised when a configuration or argument violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver its contract
/// (integrator step underflow, grid escape, unwrap ambiguity, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace selfgrav
