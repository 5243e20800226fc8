#pragma once

#include <stdexcept>
#include <string>

namespace clockreg {

/// Bad user input: configuration, sequence files, violated preconditions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver found no admissible answer (root outside bracket, infeasible calibration).
class NoSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrator or fit failure: step-size violation, norm drift.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace clockreg
