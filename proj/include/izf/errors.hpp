#pragma once

#include <stdexcept>
#include <string>

namespace izf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or width mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced or consumed.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a function (log of non-positive, division by zero).
class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Precondition of an operation violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input files.
class LoadError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace izf
