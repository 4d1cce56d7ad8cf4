#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace impulsive {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: singular matrix, overflow, non-convergence, blow-up.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation's precondition (bad range, bad size).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Expression or config text could not be parsed. `offset` is a byte offset
/// into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Expression evaluation failed (unbound variable or non-finite result).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// A required hypothesis (A1)-(A7) does not hold for the given system.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

}  // namespace impulsive
