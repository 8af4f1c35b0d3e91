#pragma once

#include <stdexcept>
#include <string>

namespace onebit {

// Base of every exception thrown by the library. The CLI maps the two
// top-level families onto exit codes: UsageError -> 1, NumericalError -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a special function.
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Empirical probability is 0 or 1, so no finite estimate exists.
class SaturationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Closed-form inversion hits a pole (p-hat at 1/2 with a nonzero threshold).
class IllPosedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// The data carry no information about the requested parameter.
class UnidentifiableError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Cholesky failure, singular FIM and friends.
class MatrixError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_iterate)
      : NumericalError(what), last_iterate_(last_iterate) {}

  double last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_iterate_;
};

}  // namespace onebit
