#pragma once

#include <stdexcept>
#include <string>

namespace arnn {

/// Caller violated a precondition (bad shapes, bad configuration, bad flags).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Persisted state does not match what the caller expects (e.g. a checkpoint
/// for a different architecture or horizon).
class StateMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimisation produced a non-finite loss or gradient.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical degeneracy in an estimator (zero variance, singular design).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace arnn
