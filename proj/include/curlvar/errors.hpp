#pragma once

#include <stdexcept>
#include <string>

namespace curlvar {

// Base of every error raised by the library. The CLI maps the concrete type
// to an exit code and a machine-readable error record.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Malformed field: grid mismatch, wrong staggering, non-finite entries.
class InvalidField : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_field"; }
};

// Argument outside the mathematical domain of an operation (p < 1, s <= 0, ...).
class DomainError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain_error"; }
};

// Precondition of an operation does not hold (nonzero boundary potential,
// unsorted ladder, curl of a supposed gradient is not zero, ...).
class ContractViolation : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract_violation"; }
};

// Input on which an operation is undefined, e.g. a field with vanishing curl
// handed to a Nehari projection.
class DegenerateInput : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_input"; }
};

// An iterative solver exhausted its budget. Carries the last residual.
class SolverFailure : public Error {
public:
  SolverFailure(const std::string& what, double residual, int iterations)
      : Error(what + " (residual " + std::to_string(residual) + " after " +
              std::to_string(iterations) + " iterations)"),
        residual_(residual),
        iterations_(iterations) {}
  const char* kind() const noexcept override { return "solver_failure"; }
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

private:
  double residual_;
  int iterations_;
};

// NaN/Inf produced inside a solver (line search blew up).
class NumericalFailure : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical_failure"; }
};

// Not enough eigenpairs to decide which modes lie below the cut.
class UnderResolvedSpectrum : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "under_resolved_spectrum"; }
};

// Configuration problems. `field` names the offending key when known; line and
// column are 1-based positions in the source text (0 when not applicable).
class ConfigError : public Error {
public:
  ConfigError(const std::string& message, std::string field = {}, int line = 0,
              int column = 0)
      : Error(format(message, field, line, column)),
        field_(std::move(field)),
        line_(line),
        column_(column) {}
  const char* kind() const noexcept override { return "config_error"; }
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  static std::string format(const std::string& message, const std::string& field,
                            int line, int column) {
    std::string out;
    if (line > 0) {
      out += "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
    }
    if (!field.empty()) out += "'" + field + "': ";
    return out + message;
  }

  std::string field_;
  int line_;
  int column_;
};

}  // namespace curlvar
