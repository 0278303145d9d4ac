#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ommhp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Interval batches delivered out of order.
class SequencingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Non-finite or non-positive quantity where the math requires otherwise.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A configured resource cap (e.g. simulated event count) was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ommhp
