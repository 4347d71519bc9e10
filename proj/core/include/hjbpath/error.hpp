#pragma once

#include <stdexcept>
#include <string>

namespace hjbpath {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query point lies outside the domain of a field or value function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parameters or configuration values violate a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (grid files, configuration files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf produced while time stepping.
class NumericalBlowupError : public Error {
 public:
  using Error::Error;
};

/// The implicit diffusion solve did not reach its residual target.
class LinearSolveError : public Error {
 public:
  using Error::Error;
};

/// The space-time value array would exceed the configured value cap.
class MemoryBudgetError : public Error {
 public:
  using Error::Error;
};

/// A value-function invariant failed during a checked solve.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A bisection bracket does not separate the two outcomes.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// File system failures while reading or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hjbpath
