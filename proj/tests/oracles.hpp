#pragma once

#include <functional>

// Independent reference evaluators used by the test suites.  Everything here
// is implemented from the defining integrals with a self-contained adaptive
// Simpson rule -- no code is shared with the library's quadrature or
// assembly paths, so agreement is meaningful evidence.
namespace oracle {

/// Recursive adaptive Simpson integration of f over [a, b] to the absolute
/// tolerance tol.
double simpson(const std::function<double(double)>& f, double a, double b,
               double tol);

/// Exterior mass of the interval complement at x in (a, b):
///   phi(x) = ((x-a)^{-2al} + (b-x)^{-2al}) / (2 al),
/// obtained by integrating |x-y|^{-1-2al} over both exterior rays.
double phi_interval(double a, double b, double alpha, double x);

/// Pointwise regional operator on the interval (a, b):
///   p.v. Int_a^b (u(x)-u(y)) |x-y|^{-1-2al} dy
/// evaluated as a symmetric-window second-difference integral (the
/// principal value cancels by symmetry) plus the one-sided remainder.
/// u must be twice differentiable near x.  tol is absolute.
double regional_interval(const std::function<double(double)>& u, double a,
                         double b, double alpha, double x, double tol);

/// Full-space operator at x for u extended by zero outside [a, b]:
/// regional part plus u(x) times the exterior mass.
double full_interval(const std::function<double(double)>& u, double a,
                     double b, double alpha, double x, double tol);

/// Exterior mass of the ball complement in R^3 at radius r, by nested
/// quadrature of the defining double integral in spherical coordinates
/// (independent of the library's radial-kernel reduction).
double phi_ball3(double radius, double alpha, double r, double tol);

/// The full-space operator applied to (1 - x^2)_+^al on (-1, 1) is the
/// constant pi / sin(pi al): the classical closed-form identity for this
/// profile, divided by the normalization constant of the integral-form
/// operator, collapses to Gamma(1+al) Gamma(1-al) by the reflection
/// formula.
double bump_constant(double alpha);

}  // namespace oracle
