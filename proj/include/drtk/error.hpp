#pragma once

#include <stdexcept>
#include <string>

namespace drtk {

// Base of every error the toolkit raises on bad input or unsatisfiable
// preconditions. Internal failures (bugs, allocation) stay std exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input values (non-finite entries, length mismatch).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A numeric parameter outside its admissible range (k, d, budget, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The input is well formed but the requested statistic is undefined on it
// (zero variance, identical points, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class WorkflowError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

// File could not be read or parsed. Carries 1-based line/column when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(line == 0 ? what
                        : what + " (line " + std::to_string(line) + ", column " +
                              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace drtk
