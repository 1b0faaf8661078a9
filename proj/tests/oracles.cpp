#include "oracles.hpp"

#include <cmath>

namespace oracle {
namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  // Per-panel tolerance (no halving): integrable endpoint kinks terminate at
  // a depth proportional to log(1/tol) instead of exploding exponentially.
  return simpson_rec(f, a, m, fa, flm, fm, left, tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol, depth - 1);
}

// Integral over [lo, hi] of g(t) dt via the substitution t = e^y, which
// turns algebraic growth toward the lower endpoint into a smooth integrand.
double simpson_log(const std::function<double(double)>& g, double lo,
                   double hi, double tol) {
  return simpson([&](double y) { const double t = std::exp(y); return g(t) * t; },
                 std::log(lo), std::log(hi), tol);
}

}  // namespace

double simpson(const std::function<double(double)>& f, double a, double b,
               double tol) {
  if (!(b > a)) return 0.0;
  const double fa = f(a);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

double phi_interval(double a, double b, double alpha, double x) {
  const double ta = 2.0 * alpha;
  return (std::pow(x - a, -ta) + std::pow(b - x, -ta)) / ta;
}

double regional_interval(const std::function<double(double)>& u, double a,
                         double b, double alpha, double x, double tol) {
  const double q = 1.0 + 2.0 * alpha;
  const double w = std::min(x - a, b - x);

  // Symmetric window: Int_0^w (2u(x) - u(x+t) - u(x-t)) t^{-q} dt.  The
  // integrand behaves like -u''(x) t^{1-2al} at t -> 0; the slice below t0
  // is added in that Taylor approximation and the rest is integrated in
  // log t, where the algebraic profile is smooth.
  const double ux = u(x);
  const double t0 = 1e-5 * w;
  const double h = 1e-4 * w;
  const double d2 = (u(x + h) + u(x - h) - 2.0 * ux) / (h * h);
  const double taylor =
      -d2 * std::pow(t0, 2.0 - 2.0 * alpha) / (2.0 - 2.0 * alpha);
  const double near = simpson_log(
      [&](double t) {
        return (2.0 * ux - u(x + t) - u(x - t)) * std::pow(t, -q);
      },
      t0, w, tol * 0.25);

  // One-sided remainder of the wider side (empty when x is centered),
  // integrated in the log of the distance to x.
  double far = 0.0;
  if (x - a > w) {
    far = simpson_log(
        [&](double d) { return (ux - u(x - d)) * std::pow(d, -q); }, w, x - a,
        tol * 0.25);
  } else if (b - x > w) {
    far = simpson_log(
        [&](double d) { return (ux - u(x + d)) * std::pow(d, -q); }, w, b - x,
        tol * 0.25);
  }
  return taylor + near + far;
}

double full_interval(const std::function<double(double)>& u, double a,
                     double b, double alpha, double x, double tol) {
  return regional_interval(u, a, b, alpha, x, tol) +
         u(x) * phi_interval(a, b, alpha, x);
}

double phi_ball3(double radius, double alpha, double r, double tol) {
  const double p = 0.5 * (3.0 + 2.0 * alpha);
  const auto shell = [&](double s) {
    // Int_0^pi sin(theta) (r^2 + s^2 - 2 r s cos(theta))^{-p} dtheta,
    // resolved to a tolerance matching the shell's own weight so distant
    // shells are not over-refined.
    const double inner_tol = tol * 1e-3 / (2.0 * M_PI * s * s * s);
    const double inner = simpson(
        [&](double theta) {
          const double d2 = r * r + s * s - 2.0 * r * s * std::cos(theta);
          return std::sin(theta) * std::pow(d2, -p);
        },
        0.0, M_PI, inner_tol);
    return 2.0 * M_PI * s * s * inner;
  };
  const double cut = 64.0 * radius;
  const double body = simpson_log(shell, radius * (1.0 + 1e-12), cut,
                                  tol * 0.5);
  // Algebraic tail: the shell integrand is 4 pi s^{-1-2al} (1 + O((r/s)^2))
  // beyond the cut.
  const double tail = 4.0 * M_PI * std::pow(cut, -2.0 * alpha) / (2.0 * alpha);
  return body + tail;
}

double bump_constant(double alpha) { return M_PI / std::sin(M_PI * alpha); }

}  // namespace oracle
