#pragma once

#include <stdexcept>
#include <string>

namespace gass {

/// A parameter, configuration value or input vector violates its contract.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear-algebra step could not be completed (e.g. the preconditioner is not SPD).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The objective returned a non-finite value.
class ObjectiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gass
