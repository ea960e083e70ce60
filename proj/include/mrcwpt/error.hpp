#pragma once

#include <stdexcept>
#include <string>

namespace mrcwpt {

/// Input violates a documented invariant. `field` names the offending value
/// (e.g. "receiver.2.x_lo") when one can be identified.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& msg, std::string field = {})
      : std::invalid_argument(field.empty() ? msg : field + ": " + msg),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A problem that is well formed but has no feasible point.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Floating-point or solver failure that should never be silent.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario text that cannot be tokenized or parsed.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& where, int line, int column, const std::string& msg)
      : ValidationError(where + ":" + std::to_string(line) + ":" + std::to_string(column) +
                        ": " + msg),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace mrcwpt
