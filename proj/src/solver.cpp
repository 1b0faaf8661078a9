#include "rflab/solver.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rflab/errors.hpp"

namespace rflab {

SourceField SourceField::zero(const GradedMesh& mesh, double trace_value) {
  SourceField s;
  s.interior = Eigen::VectorXd::Zero(mesh.size);
  s.trace = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(mesh.boundary_nodes.size()), trace_value);
  return s;
}

SourceField SourceField::from_function(const GradedMesh& mesh,
                                       const std::function<double(double)>& g,
                                       double trace_value) {
  SourceField s = zero(mesh, trace_value);
  for (int i = 0; i < mesh.size; ++i) s.interior(i) = g(mesh.node(i));
  return s;
}

namespace {

void check_shapes(const OperatorMatrix& op, const SourceField& s) {
  if (s.interior.size() != op.interior.rows())
    throw ValidationError("source field does not match the operator size");
  if (s.trace.size() != op.boundary.cols())
    throw ValidationError("trace does not match the boundary block");
}

Eigen::VectorXd apply_f(const Nonlinearity& f, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = f(v(i));
  return out;
}

struct IterateResult {
  Eigen::VectorXd values;
  int iterations = 0;
  double min_step_delta = 0.0;
  bool monotone = true;
  double b2 = 0.0;
};

// Certified monotone iteration (direction +1: nondecreasing from a
// subsolution start; -1: nonincreasing from a supersolution start).
//
// Each candidate step solves (A + D) v_new = D v - f(v) + g - B t with a
// nonnegative diagonal shift D, which rearranges to the exact semilinear
// residual of the new iterate:
//   A v_new + B t + f(v_new) - g = (f(v_new) - f(v)) - D (v_new - v).
// Accepting a step therefore requires, up to rounding tolerances,
//   dir * (v_new - v)                    >= 0   (monotone increment)
//   dir * (D (v_new - v) - (f_new - f))  >= 0   (residual keeps its sign)
// The second certificate is the sub/supersolution property of the new
// iterate, so an accepted sequence can never cross the fixed point: A + D
// stays an M-matrix for any D >= 0, so by inverse positivity the iterates
// are monotone and bounded by the exact discrete solution.
//
// Under the adaptive policy a violation discards the step and raises the
// shift only at the offending nodes, using the observed secant slope of f
// there; a scalar shift would have to carry the boundary-layer slope
// everywhere and its interior contraction degrades with the trace height.
// The derivative-bound policy uses the constant a-priori shift
// Lip(f on [-range, range]) + range and never rejects.
IterateResult iterate_monotone(const OperatorMatrix& op, const Nonlinearity& f,
                               const SourceField& src,
                               const Eigen::VectorXd& v0, double range,
                               int dir, const SolverConfig& cfg) {
  const Eigen::MatrixXd& A = op.interior;
  const Eigen::Index M = A.rows();
  const Eigen::VectorXd rhs_base = src.interior - op.boundary * src.trace;
  const Eigen::VectorXd row_abs = A.cwiseAbs().rowwise().sum();

  const bool adaptive = cfg.policy == StiffnessPolicy::Adaptive;
  Eigen::VectorXd shift = Eigen::VectorXd::Constant(
      M, adaptive ? 1.0 : f.lipschitz_on(range) + range);

  Eigen::MatrixXd shifted;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  auto refactor = [&]() {
    shifted = A;
    shifted.diagonal() += shift;
    lu.compute(shifted);
  };
  refactor();

  IterateResult out;
  out.min_step_delta = std::numeric_limits<double>::infinity();
  Eigen::VectorXd v = v0;
  Eigen::VectorXd fv = apply_f(f, v);
  int cooldown = 0, streak = 0;
  double scale_hi = 0.0;  // largest per-node magnitude seen by a certificate

  for (int m = 1; m <= cfg.max_iter; ++m) {
    const Eigen::VectorXd rhs = shift.cwiseProduct(v) - fv + rhs_base;
    const Eigen::VectorXd v_new = lu.solve(rhs);
    const Eigen::VectorXd fv_new = apply_f(f, v_new);
    const Eigen::VectorXd delta = v_new - v;

    bool ok = true;
    double worst_delta = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < M; ++i) {
      const double mag = std::abs(v(i)) + std::abs(v_new(i));
      scale_hi = std::max(scale_hi, mag);
      const double mono_tol = 1e-10 + 1e-12 * mag;
      const double sd = dir * delta(i);
      worst_delta = std::min(worst_delta, sd);
      const double res =
          dir * (shift(i) * delta(i) - (fv_new(i) - fv(i)));
      const double res_tol =
          1e-11 * ((shift(i) + row_abs(i)) * mag + std::abs(fv(i)) +
                   std::abs(fv_new(i)) + std::abs(rhs_base(i)));
      if (sd < -mono_tol || res < -res_tol) {
        ok = false;
        if (!adaptive) continue;
        // Raise the shift at this node past the observed secant slope.
        double bump = 4.0 * shift(i);
        if (delta(i) != 0.0) {
          const double secant = (fv_new(i) - fv(i)) / delta(i);
          if (std::isfinite(secant))
            bump = std::max(bump, 1.25 * std::abs(secant));
        }
        shift(i) = std::max(shift(i), std::min(bump, 1e19));
      }
    }

    if (!ok && adaptive) {
      if (shift.maxCoeff() > 1e18)
        throw NonconvergenceError(
            "monotone iteration cannot hold its certificates",
            shift.maxCoeff());
      refactor();
      cooldown = 16;
      streak = 0;
      continue;
    }
    // Derivative-bound policy: the shift is a-priori valid, certificate
    // slack only reflects rounding; record and continue.
    out.min_step_delta = std::min(out.min_step_delta, worst_delta);
    v = v_new;
    fv = fv_new;
    out.iterations = m;
    ++streak;
    if (cooldown > 0) --cooldown;

    double gap = 0.0;
    for (Eigen::Index i = 0; i < M; ++i)
      gap = std::max(gap, std::abs(delta(i)) / (1.0 + std::abs(v_new(i))));
    if (gap <= cfg.tol_fixed_point) {
      out.values = v;
      out.monotone = out.min_step_delta >= -1e-10;
      out.b2 = shift.maxCoeff();
      // Safety net: accepted steps already satisfied the per-node
      // certificates, so a violation beyond their rounding scale means a
      // logic error, not a numerical one.
      if (out.min_step_delta < -(1e-10 + 1e-12 * scale_hi))
        throw InvariantBreachError("monotone iteration produced a step "
                                   "against its direction");
      return out;
    }
    if (adaptive && cooldown == 0 && streak % 16 == 0 &&
        shift.maxCoeff() > 1e-8) {
      shift = shift.cwiseMax(2e-8) * 0.5;
      refactor();
    }
  }
  throw NonconvergenceError("monotone iteration hit the step limit",
                            cfg.tol_fixed_point);
}

double sup_residual(const OperatorMatrix& op, const Nonlinearity& f,
                    const SourceField& src, const Eigen::VectorXd& v) {
  const Eigen::VectorXd r = op.interior * v + op.boundary * src.trace +
                            apply_f(f, v) - src.interior;
  return r.cwiseAbs().maxCoeff();
}

SolutionField make_field(const OperatorMatrix& op, const SourceField& src,
                         IterateResult&& it, double b1, double residual) {
  SolutionField fld;
  fld.mesh = op.mesh;
  fld.kind = op.kind;
  fld.values = std::move(it.values);
  fld.trace = src.trace;
  fld.iterations = it.iterations;
  fld.final_residual = residual;
  fld.min_step_delta = it.min_step_delta;
  fld.monotone = it.monotone;
  fld.b1 = b1;
  fld.b2 = it.b2;
  return fld;
}

}  // namespace

SolutionField solve_linear_dirichlet(const OperatorMatrix& op,
                                     const SourceField& source) {
  check_shapes(op, source);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.interior);
  SolutionField fld;
  fld.mesh = op.mesh;
  fld.kind = op.kind;
  fld.values = lu.solve(source.interior - op.boundary * source.trace);
  fld.trace = source.trace;
  fld.iterations = 1;
  fld.final_residual =
      (op.interior * fld.values + op.boundary * source.trace - source.interior)
          .cwiseAbs()
          .maxCoeff();
  return fld;
}

GreenMatrix green_matrix(const OperatorMatrix& op) {
  const Eigen::Index M = op.interior.rows();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.interior);
  GreenMatrix g;
  g.values = lu.solve(Eigen::MatrixXd::Identity(M, M));
  const double scale = g.values.cwiseAbs().maxCoeff();
  g.symmetry_defect =
      (g.values - g.values.transpose()).cwiseAbs().maxCoeff() / scale;
  g.min_entry = g.values.minCoeff();
  return g;
}

SolutionField solve_semilinear(const OperatorMatrix& op, const Nonlinearity& f,
                               const SourceField& source,
                               const SolverConfig& config) {
  check_shapes(op, source);

  // A-priori bound b1 >= sup |u| from the discrete potentials of the split
  // source and of the constant 1, so the start value -b1 lies below the
  // solution and f only matters on [-b1, b1].
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.interior);
  const Eigen::VectorXd gp = source.interior.cwiseMax(0.0);
  const Eigen::VectorXd gm = (-source.interior).cwiseMax(0.0);
  const double n = source.trace.size() > 0
                       ? source.trace.cwiseAbs().maxCoeff()
                       : 0.0;
  const Eigen::VectorXd w_plus = lu.solve(gp);
  const Eigen::VectorXd w_minus = lu.solve(gm);
  const Eigen::VectorXd pot_one =
      lu.solve(Eigen::VectorXd::Ones(op.interior.rows()));
  const Eigen::VectorXd w_bar =
      Eigen::VectorXd::Constant(op.interior.rows(), n) - w_minus -
      f(n) * pot_one;
  const double b1 =
      std::max(n + w_plus.maxCoeff(), std::abs(w_bar.minCoeff()));

  if (!f.check_monotone(-b1, b1))
    throw ValidationError("nonlinearity is not nondecreasing on the solution range");

  const Eigen::VectorXd v0 =
      Eigen::VectorXd::Constant(op.interior.rows(), -b1);
  IterateResult it = iterate_monotone(op, f, source, v0, b1, +1, config);
  const double res = sup_residual(op, f, source, it.values);
  return make_field(op, source, std::move(it), b1, res);
}

BlowupResult blowup_limit(const OperatorMatrix& op, const Nonlinearity& f,
                          const SolverConfig& config) {
  if (op.kind == OperatorKind::Regional && !op.alpha.above_half())
    throw ValidationError(
        "regional blow-up limits require alpha > 1/2 (the boundary trace is "
        "not seen otherwise)");
  if (f.is_zero())
    throw ValidationError("blow-up limits require a nonvanishing nonlinearity");
  if (f.is_power() && f.power_p() <= 1.0)
    throw ValidationError("blow-up limits require a superlinear power");
  if (!(config.n0 > 0.0) || !(config.level_factor > 1.0) ||
      !(config.n_cap >= config.n0))
    throw ValidationError("invalid boundary level schedule");

  BlowupResult result;
  result.window_rho = config.interior_window > 0.0
                          ? config.interior_window
                          : 0.2 * op.mesh.domain.inradius();
  const auto [w_lo, w_hi] = op.mesh.interior_window(result.window_rho);
  if (w_lo > w_hi)
    throw ValidationError("interior comparison window contains no nodes");

  int streak = 0;
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double n = config.n0; n <= config.n_cap * (1.0 + 1e-12);
       n *= config.level_factor) {
    const SourceField src = SourceField::zero(op.mesh, n);
    BlowupLevel level;
    level.n = n;
    level.field = solve_semilinear(op, f, src, config);
    double window_sup = 0.0;
    for (int i = w_lo; i <= w_hi; ++i)
      window_sup = std::max(window_sup, std::abs(level.field.values(i)));
    if (!result.levels.empty()) {
      const Eigen::VectorXd& prev = result.levels.back().field.values;
      for (int i = w_lo; i <= w_hi; ++i)
        level.interior_gap = std::max(
            level.interior_gap, std::abs(level.field.values(i) - prev(i)));
      level.interior_gap_rel =
          level.interior_gap / std::max(window_sup, 1e-300);
      result.final_gap = level.interior_gap_rel;
      if (level.interior_gap >= prev_gap) {
        if (++streak >= config.divergence_streak) result.diverged = true;
      } else {
        streak = 0;
      }
      prev_gap = level.interior_gap;
    }
    result.levels.push_back(std::move(level));
    if (result.levels.size() > 1 &&
        result.levels.back().interior_gap_rel <= config.tol_limit) {
      result.converged = true;
      break;
    }
  }
  return result;
}

MinimalityReport minimality_check(const OperatorMatrix& op,
                                  const Nonlinearity& f,
                                  const Barrier& barrier,
                                  const SolutionField& u, double lambda0,
                                  const SolverConfig& config) {
  const Eigen::Index M = op.interior.rows();
  if (static_cast<Eigen::Index>(barrier.node_values.size()) != M ||
      u.values.size() != M)
    throw ValidationError("minimality check needs matching mesh sizes");
  if (!(lambda0 > 0.0)) throw ValidationError("lambda0 must be positive");

  const Eigen::VectorXd V = Eigen::Map<const Eigen::VectorXd>(
      barrier.node_values.data(), static_cast<Eigen::Index>(M));
  SourceField src = SourceField::zero(op.mesh, 0.0);
  src.trace = u.trace;

  MinimalityReport rep;
  const Eigen::VectorXd bt = op.boundary * src.trace;
  for (double lam = lambda0; lam <= std::ldexp(1.0, 20); lam *= 2.0) {
    const Eigen::VectorXd vs = lam * V;
    const Eigen::VectorXd r0 = op.interior * vs + bt + apply_f(f, vs);
    double worst = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < M; ++i) {
      const double scale = op.interior.row(i).cwiseAbs().dot(vs.cwiseAbs()) +
                           std::abs(bt(i)) + f(vs(i)) + 1e-300;
      worst = std::min(worst, r0(i) / scale);
    }
    rep.pre_residual_min = worst;
    if (worst >= -1e-9) {
      rep.lambda = lam;
      rep.certified = true;
      break;
    }
  }
  if (!rep.certified) return rep;

  const double range = rep.lambda * V.cwiseAbs().maxCoeff();
  IterateResult down =
      iterate_monotone(op, f, src, rep.lambda * V, range, -1, config);
  IterateResult down2 =
      iterate_monotone(op, f, src, 2.0 * rep.lambda * V, 2.0 * range, -1,
                       config);
  rep.two_lambda_gap = (down.values - down2.values).cwiseAbs().maxCoeff();
  rep.max_excess = (u.values - down.values).maxCoeff();
  rep.sup_gap_barrier = (u.values - rep.lambda * V).maxCoeff();
  const double res = sup_residual(op, f, src, down.values);
  rep.decreasing = make_field(op, src, std::move(down), range, res);
  return rep;
}

}  // namespace rflab
