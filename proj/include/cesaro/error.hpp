#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cesaro {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// DSL syntax error. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(msg + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line),
        column_(column),
        detail_(msg) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

// Well-formed text describing an invalid object (r >= m, k = 0, ...).
class SemanticError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class HorizonOverflow : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

class ArithmeticOverflow : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

// A checked precondition failed; `witness` is the least violating index when
// one exists, 0 otherwise.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& msg, std::uint64_t witness = 0)
      : Error(msg), witness_(witness) {}
  std::uint64_t witness() const noexcept { return witness_; }

 private:
  std::uint64_t witness_;
};

}  // namespace cesaro
