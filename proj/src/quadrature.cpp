#include "rflab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "rflab/errors.hpp"

namespace rflab {

KernelMoments::KernelMoments(double a) : alpha(a), two_alpha(2.0 * a) {
  if (!(a > 0.0) || !(a < 1.0))
    throw ValidationError("KernelMoments: alpha must lie in (0,1)");
}

double KernelMoments::m0(double t0, double t1) const {
  return (std::pow(t0, -two_alpha) - std::pow(t1, -two_alpha)) / two_alpha;
}

double KernelMoments::m1(double t0, double t1) const {
  const double e = 1.0 - two_alpha;
  if (std::abs(e) < 1e-12) return std::log(t1 / t0);
  return (std::pow(t1, e) - std::pow(t0, e)) / e;
}

double KernelMoments::m2_from_zero(double t) const {
  const double e = 2.0 - two_alpha;  // > 0 for alpha < 1
  return std::pow(t, e) / e;
}

namespace {

GaussRule build_gauss(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Newton iteration on P_n with the Chebyshev-angle initial guess.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

std::mutex g_rule_mutex;
std::map<int, GaussRule> g_rules;

}  // namespace

const GaussRule& gauss_legendre(int order) {
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = g_rules.find(order);
  if (it == g_rules.end()) it = g_rules.emplace(order, build_gauss(order)).first;
  return it->second;
}

double gauss_panel(const std::function<double(double)>& f, double a, double b,
                   int order) {
  const GaussRule& r = gauss_legendre(order);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t k = 0; k < r.nodes.size(); ++k)
    s += r.weights[k] * f(mid + half * r.nodes[k]);
  return s * half;
}

namespace {

double adapt_rec(const std::function<double(double)>& f, double a, double b,
                 double whole, double abs_tol, double rel_tol, int order,
                 int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_panel(f, a, mid, order);
  const double right = gauss_panel(f, mid, b, order);
  const double refined = left + right;
  const double err = std::abs(refined - whole);
  if (depth <= 0 || err <= abs_tol + rel_tol * std::abs(refined)) return refined;
  return adapt_rec(f, a, mid, left, 0.5 * abs_tol, rel_tol, order, depth - 1) +
         adapt_rec(f, mid, b, right, 0.5 * abs_tol, rel_tol, order, depth - 1);
}

}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, double rel_tol, int order,
                          int max_depth) {
  if (!(b > a)) return 0.0;
  return adapt_rec(f, a, b, gauss_panel(f, a, b, order), abs_tol, rel_tol,
                   order, max_depth);
}

double geometric_tail_integrate(const std::function<double(double)>& f,
                                double a, double abs_tol, double rel_tol) {
  if (!(a > 0.0))
    throw ValidationError("geometric_tail_integrate: left endpoint must be > 0");
  double total = 0.0;
  double lo = a;
  for (int k = 0; k < 2000; ++k) {
    const double hi = 2.0 * lo;
    const double block =
        adaptive_integrate(f, lo, hi, abs_tol * 0.25, rel_tol * 0.25);
    total += block;
    lo = hi;
    if (std::abs(block) <= abs_tol + rel_tol * std::abs(total) && k >= 4)
      break;
  }
  return total;
}

}  // namespace rflab
