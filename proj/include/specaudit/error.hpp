#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace specaudit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the range a container accepts (e.g. above lambda_max).
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A query needs spectral data beyond the completeness bound of a spectrum.
class CompletenessError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the 1-based line number when known.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A computation would exceed a configured resource budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A numerically constructed object failed one of its build-time checks.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace specaudit
