#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hornopt {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: syntax errors, unknown symbols, arity
/// mismatches, structures that violate their vocabulary.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Syntax error with a 1-based source location.
class ParseError : public InputError {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : InputError(std::to_string(line) + ":" + std::to_string(column) + ": " +
                   message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A configured resource bound (search space, clause count, vertex count,
/// wall-clock time) would be exceeded.
class LimitError : public Error {
 public:
  using Error::Error;
};

/// Evaluation-time failure: unbound variable, missing interpretation.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A result failed its own consistency re-check. Indicates a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace hornopt
