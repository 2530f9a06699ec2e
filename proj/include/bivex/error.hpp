#pragma once

#include <stdexcept>
#include <string>

namespace bivex {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Point outside the support of a distribution (e.g. below a GPD threshold).
class SupportError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative numerical routine failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}

  double bracket_lo() const { return lo_; }
  double bracket_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Numerical evaluation produced a value outside its accuracy budget.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters violating a structural or identifiability constraint.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input data; carries a 1-based row (and column when known).
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
      : std::runtime_error(what), row_(row), column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// File could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration file that does not match the expected schema.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bivex
