#pragma once

#include <stdexcept>
#include <string>

namespace citedyn {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input file does not match the declared schema (missing columns, bad header).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a data invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Fewer observations than an operation needs.
class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

/// Design matrix or sample without usable variation.
class DegenerateError : public DataError {
 public:
  using DataError::DataError;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace citedyn
