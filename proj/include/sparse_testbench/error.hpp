#pragma once

#include <stdexcept>
#include <string>

namespace sparse_testbench {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or index sets that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// X'X is not numerically positive definite.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration would exceed its term budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A regime label for which no exponent is claimed.
class GapRegimeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Direct summation would leave the double range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparse_testbench
