#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace badge {

/// Raised when an operation's preconditions are violated by its arguments.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed dataset or config text. Carries the 1-based row (physical line)
/// and column where parsing failed; either may be 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    std::string out = what;
    if (row != 0) {
      out += " (row " + std::to_string(row);
      if (column != 0) {
        out += ", column " + std::to_string(column);
      }
      out += ")";
    }
    return out;
  }

  std::size_t row_;
  std::size_t column_;
};

/// A results file or manifest does not have the expected layout.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace badge
