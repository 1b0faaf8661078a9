#pragma once

#include <functional>
#include <vector>

namespace rflab {

/// Closed-form antiderivative moments of the 1D singular kernel t^{-1-2a},
/// used by the exact cell-by-cell assembly.  All take 0 < t0 <= t1.
struct KernelMoments {
  explicit KernelMoments(double alpha);

  /// m0 = Int_{t0}^{t1} t^{-1-2a} dt
  double m0(double t0, double t1) const;
  /// m1 = Int_{t0}^{t1} t^{-2a} dt   (log branch at a = 1/2)
  double m1(double t0, double t1) const;
  /// m2 = Int_{0}^{t} s^{1-2a} ds   (finite for all a in (0,1))
  double m2_from_zero(double t) const;

  double alpha = 0.0;
  double two_alpha = 0.0;
};

/// Gauss-Legendre rule on [-1, 1]; nodes/weights computed once per order by
/// Newton iteration on the Legendre polynomial and cached.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

/// Integrates f over [a, b] with a fixed-order Gauss panel.
double gauss_panel(const std::function<double(double)>& f, double a, double b,
                   int order = 16);

/// Adaptive panel integration: bisects until the two-half refinement of every
/// panel agrees with the parent to abs_tol + rel_tol * |estimate|.
/// Handles integrable endpoint singularities through depth-limited dyadic
/// bisection (depth cap 52 keeps panel widths above denormal scale).
double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, double rel_tol = 1e-12,
                          int order = 16, int max_depth = 52);

/// Integral over [a, +inf) of an algebraically decaying integrand: geometric
/// blocks [a 2^k, a 2^{k+1}] (a > 0) integrated adaptively until the running
/// block falls below the requested tolerance of the accumulated value.
double geometric_tail_integrate(const std::function<double(double)>& f,
                                double a, double abs_tol,
                                double rel_tol = 1e-12);

}  // namespace rflab
