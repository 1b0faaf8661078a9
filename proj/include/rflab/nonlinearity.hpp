#pragma once

#include <functional>
#include <utility>

namespace rflab {

/// Nondecreasing source nonlinearity f with f(0) >= 0 and a local Lipschitz
/// estimator.  The power family is f(s) = c max(s, 0)^p (the natural
/// nondecreasing extension of c s^p; only the positive branch matters for
/// the problems solved here).  Custom evaluators carry a user-supplied
/// Lipschitz bound and are spot-checked for monotonicity on use.
class Nonlinearity {
 public:
  static Nonlinearity zero();
  static Nonlinearity power(double c, double p);
  static Nonlinearity custom(std::function<double(double)> f,
                             std::function<double(double)> lipschitz_on);

  double operator()(double s) const;
  /// Upper bound for the Lipschitz constant of f on [-b, b].  For power
  /// exponents p < 1 (no Lipschitz bound at 0) the slope is capped at
  /// s = 1e-8, which such callers must tolerate; the solvers reject these
  /// exponents anyway.
  double lipschitz_on(double b) const;

  bool is_power() const { return family_ == Family::Power || family_ == Family::Zero; }
  bool is_zero() const { return family_ == Family::Zero; }
  double power_c() const { return c_; }
  double power_p() const { return p_; }

  /// Spot check (10^3 samples) that f is nondecreasing on [lo, hi]; power
  /// families pass analytically.
  bool check_monotone(double lo, double hi) const;

 private:
  enum class Family { Zero, Power, Custom };
  Family family_ = Family::Zero;
  double c_ = 0.0, p_ = 1.0;
  std::function<double(double)> f_;
  std::function<double(double)> lip_;
};

}  // namespace rflab
