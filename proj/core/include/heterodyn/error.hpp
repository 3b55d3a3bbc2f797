#pragma once

#include <stdexcept>
#include <string>

namespace heterodyn {

// Base of every error raised by the library. `code()` is a short, stable
// token used in machine-readable diagnostics (see the CLI error line).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

// Configuration rejected by validation or by the config parser.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("invalid-config", what) {}
};

// Bad user input that is not a model configuration problem (n = 0, m > len, ...).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("invalid-input", what) {}
};

// Two grid objects that must share a partition do not.
class GridMismatch : public Error {
 public:
  explicit GridMismatch(const std::string& what) : Error("grid-mismatch", what) {}
};

// An iteration failed to reach its tolerance; carries the last residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error("non-convergence", what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A runtime state left the region a valid configuration guarantees.
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what) : Error("invariant-violation", what) {}
};

// A statistical or modelling assumption required by an operation does not hold.
class AssumptionViolation : public Error {
 public:
  explicit AssumptionViolation(const std::string& what) : Error("assumption-violation", what) {}
};

// The filter correction step met an observation with zero predicted likelihood.
class ZeroNormalizer : public Error {
 public:
  explicit ZeroNormalizer(const std::string& what) : Error("zero-normalizer", what) {}
};

// Statistic is undefined on the given data (zero variance, all-equal maxima, empty hole).
class DegenerateData : public Error {
 public:
  explicit DegenerateData(const std::string& what) : Error("degenerate", what) {}
};

}  // namespace heterodyn
