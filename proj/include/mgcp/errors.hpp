#pragma once

#include <stdexcept>
#include <string>

namespace mgcp {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument: dimension mismatch, invalid configuration value, out-of-range tag.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Missing entry in a structured configuration (e.g. a pair absent from FullMgcpParams).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Factorization failure, non-finite evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Data that cannot support a fit (constant output, too few points).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// Every restart of an optimization failed.
class OptimizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Problem too large for the requested (non-distributed) method.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace mgcp
