#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "rflab/geometry.hpp"
#include "rflab/nonlinearity.hpp"
#include "rflab/operator_matrix.hpp"

namespace rflab {

/// Boundary barrier profile: V(x) = rho(x)^tau (tau in (-1, 0)) on the layer
/// {rho < t0}, extended inward by the cubic in (rho - t0) that matches value,
/// first and second derivative at t0 and has zero slope at the deepest point
/// rho = inradius.  The result is C^2 across the junction, positive
/// throughout, and blows up like rho^tau at the boundary.
struct Barrier {
  Domain domain;
  double tau = -0.5;
  double t0 = 0.25;
  double rho_max = 1.0;             ///< inradius (deepest point)
  double blend[4] = {0, 0, 0, 0};   ///< cubic coefficients in (rho - t0)

  /// Profile as a function of boundary distance (rho > 0).
  double profile(double rho) const;
  /// Stable difference profile(rho + delta) - profile(rho); exact to
  /// relative machine precision even for |delta| << rho (needed by the
  /// principal-value quadrature).
  double profile_diff(double rho, double delta) const;
  /// Stable paired second difference
  ///   profile(rho + dp) + profile(rho + dm) - 2 profile(rho)
  /// for a near-symmetric pair (dp ~ -dm).  The linear parts cancel
  /// analytically: the caller passes sum_exact = dp + dm computed without
  /// rounding from the step geometry (0 for exactly symmetric pairs), and
  /// the power/cubic branches use series/polynomial expansions in which no
  /// catastrophic cancellation occurs.  Without this the principal-value
  /// integrand is dominated by rounding noise as the offset shrinks.
  double profile_second_diff(double rho, double dp, double dm,
                             double sum_exact) const;
  /// V at the point with coordinate x (interval) or radius x (ball).
  double operator()(double x) const;

  std::vector<double> node_values;  ///< V at the interior mesh nodes
};

Barrier build_barrier(const GradedMesh& mesh, double tau, double t0);

/// Pointwise application of the regional operator to the barrier profile by
/// adaptive quadrature of the defining integral (the barrier has infinite
/// boundary trace, so the assembled matrix cannot represent it; the analytic
/// profile can be integrated directly).  The near field integrates the
/// symmetrized second difference, which is absolutely integrable for all
/// alpha in (0,1).
double regional_apply_quadrature(const Domain& domain, FractionalOrder alpha,
                                 const Barrier& barrier, double x);

struct BarrierBoundReport {
  std::vector<double> applied;    ///< regional operator at each node
  std::vector<double> profile_m;  ///< |applied| * rho^{2 alpha - tau}
  double sup_m = 0.0;
  double sup_m_refined = 0.0;     ///< same quantity on the once-refined mesh
  double refinement_change = 0.0; ///< |refined - base| / base
  double max_consistency_residual = 0.0;  ///< full vs regional + phi*V check
};

/// Certifies the boundary bound |(-Delta)^a_Omega V| <= C rho^{tau - 2a}:
/// reports the profile m(x) = |applied| rho^{2a - tau} over the nodes, its
/// sup, and the change of the sup under one mesh refinement (2M nodes).
/// Also cross-checks the identity  full = regional + phi V  with the
/// exterior mass integrated independently.
BarrierBoundReport certify_barrier_bound(const OperatorMatrix& op,
                                         const Barrier& barrier);

struct SuperSolutionReport {
  bool certified = false;           ///< at the lambda passed in
  double lambda = 0.0;
  double min_margin = 0.0;          ///< min over nodes of lambda w + f(lambda V)
  double smallest_certifying_lambda = 0.0;  ///< power of 2, 0 if cap reached
  std::vector<double> applied;      ///< operator at nodes (lambda = 1)
};

/// Checks  apply(lambda V) + f(lambda V) >= 0  at every interior node, with
/// the operator of op.kind applied to the profile by quadrature (cached once;
/// the operator is linear in lambda).  Also runs a doubling search from
/// lambda = 1 for the smallest certifying power of two (cap 2^40).
SuperSolutionReport certify_super_solution(const OperatorMatrix& op,
                                           const Barrier& barrier,
                                           const Nonlinearity& f, double lambda);

enum class TailVerdict { Converges, Diverges };

struct KOReport {
  TailVerdict ko_verdict = TailVerdict::Diverges;         ///< int ds / sqrt(F)
  TailVerdict tail_cond_verdict = TailVerdict::Diverges;  ///< int f s^{-1-kappa}
  double kappa = 0.0;              ///< (1 + alpha) / (1 - alpha)
  double ko_tails[2] = {0, 0};     ///< block integrals over [1e3,1e6],[1e6,1e9]
  double cond_tails[2] = {0, 0};
  double ko_ratio = 0.0;
  double cond_ratio = 0.0;
  bool power_family = false;
  TailVerdict ko_analytic = TailVerdict::Diverges;    ///< power: p > 1
  TailVerdict cond_analytic = TailVerdict::Diverges;  ///< power: p < kappa
  bool matches_analytic = true;
};

/// Numeric convergence classification of the two existence integrals by
/// geometric-cutoff tail ratios (cutoffs 1e3, 1e6, 1e9).  Tails of a
/// convergent algebraic integral decay block over block; stagnating or
/// growing tails (ratio > 2/3, which subsumes the growth test >= 1.5)
/// classify as divergent.  For the power family f = c s^p the analytic
/// thresholds (p > 1, p < kappa) are evaluated alongside for cross-checking.
KOReport ko_classify(const Nonlinearity& f, FractionalOrder alpha);

}  // namespace rflab
