#pragma once

#include <stdexcept>
#include <string>

namespace stepguard {

/// Caller passed arguments that violate an operation's preconditions
/// (dimension mismatch, out-of-range time, bad configuration).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// x-pred noise form evaluated below the schedule's time floor.
class NearSingularTime : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numeric result that must be finite was not.
class NonFiniteValue : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Rejection sampling could not satisfy its acceptance criterion.
class RetryBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed line in a line-delimited text file (suite, records).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace stepguard
