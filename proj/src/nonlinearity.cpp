#include "rflab/nonlinearity.hpp"

#include <cmath>

#include "rflab/errors.hpp"

namespace rflab {

Nonlinearity Nonlinearity::zero() { return Nonlinearity{}; }

Nonlinearity Nonlinearity::power(double c, double p) {
  if (!(c >= 0.0))
    throw ValidationError("power nonlinearity needs c >= 0 to be nondecreasing");
  if (!(p >= 0.0)) throw ValidationError("power nonlinearity needs p >= 0");
  if (c == 0.0) return zero();
  Nonlinearity f;
  f.family_ = Family::Power;
  f.c_ = c;
  f.p_ = p;
  return f;
}

Nonlinearity Nonlinearity::custom(std::function<double(double)> f,
                                  std::function<double(double)> lipschitz_on) {
  if (!f || !lipschitz_on)
    throw ValidationError("custom nonlinearity needs evaluator and Lipschitz bound");
  Nonlinearity n;
  n.family_ = Family::Custom;
  n.f_ = std::move(f);
  n.lip_ = std::move(lipschitz_on);
  return n;
}

double Nonlinearity::operator()(double s) const {
  switch (family_) {
    case Family::Zero:
      return 0.0;
    case Family::Power:
      return s > 0.0 ? c_ * std::pow(s, p_) : (p_ == 0.0 ? c_ : 0.0);
    case Family::Custom:
      return f_(s);
  }
  return 0.0;
}

double Nonlinearity::lipschitz_on(double b) const {
  switch (family_) {
    case Family::Zero:
      return 0.0;
    case Family::Power: {
      if (p_ == 0.0) return 0.0;
      if (p_ >= 1.0) return c_ * p_ * std::pow(b, p_ - 1.0);
      return c_ * p_ * std::pow(1e-8, p_ - 1.0);  // slope cap near 0 for p < 1
    }
    case Family::Custom:
      return lip_(b);
  }
  return 0.0;
}

bool Nonlinearity::check_monotone(double lo, double hi) const {
  if (family_ != Family::Custom) return true;
  const int n = 1000;
  double prev = f_(lo);
  for (int k = 1; k <= n; ++k) {
    const double s = lo + (hi - lo) * k / n;
    const double cur = f_(s);
    if (cur < prev - 1e-12 * (std::abs(prev) + 1.0)) return false;
    prev = cur;
  }
  return true;
}

}  // namespace rflab
