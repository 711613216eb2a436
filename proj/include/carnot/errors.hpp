#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

/// Bad user input: wrong dimensions, unknown names, malformed arguments.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed algebra or CSV text. line() is 1-based, 0 when not tied to a line.
class ParseError : public InputError {
 public:
  ParseError(int line, const std::string& what)
      : InputError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// An operation was called on an algebra that lacks a required structure
/// (not nilpotent, not 2-step, ...).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A candidate abnormal lift touches the zero section.
class InvalidLift : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear system that must be solvable is not.
class InfeasibleSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace carnot
