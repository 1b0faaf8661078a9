#pragma once

#include <stdexcept>
#include <string>

namespace rflab {

/// Raised for invalid user input: malformed configs, out-of-range parameters,
/// mismatched shapes.  Maps to process exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an iterative solve exhausts its iteration budget without
/// meeting its tolerance.  Maps to process exit code 3.
class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_ = 0.0;
};

/// Raised when a structural invariant the scheme guarantees (sign structure,
/// monotone iterates under the exact Lipschitz damping, ...) is observed to
/// fail at runtime.  Maps to process exit code 4.
class InvariantBreachError : public std::runtime_error {
 public:
  explicit InvariantBreachError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rflab
