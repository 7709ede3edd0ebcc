#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace convbound {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector/matrix sizes that do not agree with a declared layout.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Not enough history to build a window (regressor, filtered reference, ...).
class InitializationError : public Error {
 public:
  using Error::Error;
};

// A controller or set that cannot be used as configured.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// Numeric arguments outside their admissible ranges.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

// Sylvester system too ill-conditioned to trust (near common factor).
class NearSingularError : public Error {
 public:
  NearSingularError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

// A (tau, t) pair whose bound right-hand side vanishes while the state does not.
class UnfittableError : public Error {
 public:
  UnfittableError(const std::string& what, long tau, long t)
      : Error(what), tau_(tau), t_(t) {}
  long tau() const noexcept { return tau_; }
  long t() const noexcept { return t_; }

 private:
  long tau_;
  long t_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "scenario validation failed";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace convbound
