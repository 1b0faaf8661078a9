#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "rflab/barrier.hpp"
#include "rflab/geometry.hpp"
#include "rflab/nonlinearity.hpp"
#include "rflab/operator_matrix.hpp"

namespace rflab {

/// Interior source g and boundary trace for the Dirichlet problem
///   L u + f(u) = g in the interior,  u = trace on the boundary nodes.
struct SourceField {
  Eigen::VectorXd interior;  ///< g at the interior mesh nodes
  Eigen::VectorXd trace;     ///< values at mesh.boundary_nodes

  static SourceField zero(const GradedMesh& mesh, double trace_value);
  static SourceField from_function(const GradedMesh& mesh,
                                   const std::function<double(double)>& g,
                                   double trace_value);
};

/// How the stiffness shift b2 in the monotone iteration
///   (L + b2) v_{m+1} = b2 v_m - f(v_m) + g
/// is chosen.
///   DerivativeBound: b2 = Lip(f on [-b1, b1]) + b1, fixed for the whole
///     run.  Provably monotone, but the contraction slows as 1/b2, which is
///     prohibitive at large boundary levels where b1 grows polynomially.
///   Adaptive: b2 starts at 1 and is driven by per-step certificates; every
///     accepted step verifies both the monotone increment and the sign of
///     the exact semilinear residual of the new iterate (which is available
///     for free as b2*delta - (f(v_new) - f(v_old))), so overshoot past the
///     fixed point is rejected before it can be accepted.  On a violation
///     the step is discarded and b2 is quadrupled; after a run of accepted
///     steps b2 is halved again.
enum class StiffnessPolicy { DerivativeBound, Adaptive };

struct SolverConfig {
  StiffnessPolicy policy = StiffnessPolicy::Adaptive;
  double tol_fixed_point = 1e-9;  ///< per-node |delta| / (1 + |v|) stop gap
  int max_iter = 200000;

  // Boundary-level schedule of the blow-up driver.
  double n0 = 1.0;
  double level_factor = 2.0;
  double n_cap = 16384.0;  ///< 2^14

  double tol_limit = 1e-6;      ///< level-to-level sup gap on the window
  double interior_window = 0.0; ///< rho cutoff; 0 selects 0.2 * inradius
  int divergence_streak = 4;    ///< growing gaps in a row flagged divergent
};

struct SolutionField {
  GradedMesh mesh;
  OperatorKind kind = OperatorKind::Regional;
  Eigen::VectorXd values;
  Eigen::VectorXd trace;
  int iterations = 0;
  double final_residual = 0.0;  ///< sup |A v + B trace + f(v) - g|
  double min_step_delta = 0.0;  ///< most adverse signed increment observed
  bool monotone = true;         ///< every increment within -1e-10 of its sign
  double b1 = 0.0;              ///< a-priori bound used for the start value
  double b2 = 0.0;              ///< final stiffness shift
};

/// Direct solve of the linear Dirichlet problem  A v + B trace = g.
SolutionField solve_linear_dirichlet(const OperatorMatrix& op,
                                     const SourceField& source);

/// Inverse of the interior operator block: column j holds the potential of
/// a unit load at node j (the discrete Green function sampled at nodes is
/// values(i,j) / cell_weight(j)).
struct GreenMatrix {
  Eigen::MatrixXd values;
  double symmetry_defect = 0.0;  ///< max |G - G^T| / max |G|
  double min_entry = 0.0;
};

GreenMatrix green_matrix(const OperatorMatrix& op);

/// Monotone iteration for  A v + B trace + f(v) = g  from the constant
/// start v0 = -b1, with b1 computed from the discrete potentials of g and
/// the trace so that the fixed point lies in [-b1, b1].  The iteration is
/// nondecreasing; each step must pass the monotonicity and residual-sign
/// certificates (see StiffnessPolicy).
SolutionField solve_semilinear(const OperatorMatrix& op, const Nonlinearity& f,
                               const SourceField& source,
                               const SolverConfig& config);

struct BlowupLevel {
  double n = 0.0;            ///< boundary level of this solve
  SolutionField field;
  double interior_gap = 0.0; ///< sup gap to the previous level on the window
  double interior_gap_rel = 0.0;  ///< gap over the window sup of this level
};

struct BlowupResult {
  std::vector<BlowupLevel> levels;
  bool converged = false;   ///< relative interior gap fell below tol_limit
  bool diverged = false;    ///< gaps grew divergence_streak times in a row
  double final_gap = 0.0;   ///< last relative interior gap
  double window_rho = 0.0;  ///< rho cutoff of the comparison window
};

/// Increasing-boundary-level driver u_{n_k} with n_k = n0 * factor^k up to
/// n_cap: solves each level from a cold start and compares consecutive
/// levels on the interior window.  Regional problems require alpha > 1/2;
/// the nonlinearity must be superlinear (power with p > 1).
BlowupResult blowup_limit(const OperatorMatrix& op, const Nonlinearity& f,
                          const SolverConfig& config);

struct MinimalityReport {
  double lambda = 0.0;        ///< multiplier certifying lambda V as start
  bool certified = false;     ///< discrete supersolution residual held
  double pre_residual_min = 0.0;  ///< worst scaled residual of lambda V
  SolutionField decreasing;   ///< limit of the decreasing iteration
  double max_excess = 0.0;        ///< sup (u - decreasing limit)
  double sup_gap_barrier = 0.0;   ///< sup (u - lambda V) over the nodes
  double two_lambda_gap = 0.0;    ///< sup gap between the limits from
                                  ///< lambda and 2 lambda starts
};

/// Squeezes the computed solution from above: finds lambda (doubling from
/// lambda0) with  A (lambda V) + B trace + f(lambda V) >= 0  in the
/// discrete system with the trace of u, runs the decreasing monotone
/// iteration from lambda V, and compares its limit against u.  A second run
/// from 2 lambda V cross-checks that both decreasing limits agree.
MinimalityReport minimality_check(const OperatorMatrix& op,
                                  const Nonlinearity& f,
                                  const Barrier& barrier,
                                  const SolutionField& u, double lambda0,
                                  const SolverConfig& config);

}  // namespace rflab
