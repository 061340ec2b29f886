#pragma once

#include <stdexcept>
#include <string>

namespace mfnet {

/// Model or configuration failed validation (CLI exit code 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Predicted candidate-event count exceeds the configured budget (exit code 3).
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver or simulation produced an invalid numerical state (exit code 4).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A jump would leave the finite state space.
class ClosureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace mfnet
