#include "rflab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rflab/errors.hpp"

namespace rflab {

namespace {

struct LogLogFit {
  double slope = 0.0, intercept = 0.0, r_squared = 1.0;
};

LogLogFit fit_loglog(const std::vector<double>& x,
                     const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  LogLogFit fit;
  const double det = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ssr = 0, sst = 0;
  const double ybar = sy / n;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (fit.intercept + fit.slope * x[k]);
    ssr += r * r;
    sst += (y[k] - ybar) * (y[k] - ybar);
  }
  fit.r_squared = sst > 0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace

RateFit fit_rate(const GradedMesh& mesh, const Eigen::VectorXd& values,
                 FitWindow window) {
  if (values.size() != mesh.size)
    throw ValidationError("value vector does not match the mesh");
  RateFit out;
  out.rho_lo = window.rho_lo > 0 ? window.rho_lo : 5.0 * mesh.h_min();
  out.rho_hi =
      window.rho_hi > 0 ? window.rho_hi : 0.1 * mesh.domain.diameter();
  if (!(out.rho_lo < out.rho_hi))
    throw ValidationError("fit window is empty");

  // The two nodes nearest each boundary sit inside the discretization layer.
  std::vector<bool> excluded(static_cast<std::size_t>(mesh.size), false);
  const int M = mesh.size;
  if (mesh.domain.kind == DomainKind::Interval && M >= 4) {
    excluded[0] = excluded[1] = true;
    excluded[static_cast<std::size_t>(M - 1)] = true;
    excluded[static_cast<std::size_t>(M - 2)] = true;
  } else if (mesh.domain.kind == DomainKind::Ball && M >= 2) {
    excluded[static_cast<std::size_t>(M - 1)] = true;
    excluded[static_cast<std::size_t>(M - 2)] = true;
  }

  std::vector<double> lx, ly;
  for (int i = 0; i < M; ++i) {
    const double rho = mesh.rho(i);
    if (excluded[static_cast<std::size_t>(i)] || rho < out.rho_lo ||
        rho > out.rho_hi)
      continue;
    if (!(values(i) > 0.0))
      throw ValidationError("power-law fit needs positive values on the window");
    lx.push_back(std::log(rho));
    ly.push_back(std::log(values(i)));
  }
  if (lx.size() < 6)
    throw ValidationError("fit window holds fewer than six usable nodes");

  const LogLogFit fit = fit_loglog(lx, ly);
  out.beta = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.r_squared;
  out.node_count = static_cast<int>(lx.size());
  return out;
}

RateFit fit_rate(const SolutionField& u, FitWindow window) {
  return fit_rate(u.mesh, u.values, window);
}

SandwichVerdict sandwich_verdict(const SolutionField& u, const Nonlinearity& f,
                                 FractionalOrder alpha, double inflation,
                                 FitWindow window) {
  if (!f.is_power() || f.is_zero())
    throw ValidationError(
        "rate intervals are only predicted for power nonlinearities");
  const double p = f.power_p();
  if (!(p > 1.0))
    throw ValidationError("rate intervals need a superlinear power");

  SandwichVerdict v;
  const double a = alpha.value;
  v.predicted_upper = 2.0 * a / (p - 1.0);
  v.predicted_lower = u.kind == OperatorKind::Regional
                          ? (2.0 * a - 1.0) / (p - 1.0)
                          : v.predicted_upper;
  v.inflation =
      inflation > 0 ? inflation
                    : (u.kind == OperatorKind::Regional ? 0.05 : 0.1);
  v.fitted = fit_rate(u, window);
  const double mag = std::abs(v.fitted.beta);
  v.pass = mag >= v.predicted_lower - v.inflation &&
           mag <= v.predicted_upper + v.inflation;
  return v;
}

GreenBoundReport green_bound_check(const GreenMatrix& green,
                                   const GradedMesh& mesh,
                                   FractionalOrder alpha) {
  if (!alpha.above_half())
    throw ValidationError("the Green bound needs alpha > 1/2");
  const Eigen::Index M = green.values.rows();
  if (M != mesh.size || green.values.cols() != M)
    throw ValidationError("Green matrix does not match the mesh");
  const double a = alpha.value;
  const int N = mesh.domain.dim;

  GreenBoundReport rep;
  rep.min_entry = green.values.minCoeff();
  rep.max_entry = green.values.maxCoeff();
  rep.nonnegative = rep.min_entry >= -1e-10 * rep.max_entry;
  const bool radial = mesh.domain.kind == DomainKind::Ball;
  const double sphere = radial ? sphere_measure(N - 1) : 1.0;
  for (Eigen::Index i = 0; i < M; ++i) {
    const double ri = mesh.rho(static_cast<int>(i));
    for (Eigen::Index j = 0; j < M; ++j) {
      if (i == j) continue;
      const double d =
          std::abs(mesh.node(static_cast<int>(i)) - mesh.node(static_cast<int>(j)));
      const double rj = mesh.rho(static_cast<int>(j));
      const double interaction = std::pow(d, -(N - 2.0 * a));
      const double boundary = std::pow(ri * rj, 2.0 * a - 1.0) /
                              std::pow(d, N - 2.0 + 2.0 * a);
      const double bound = std::min(interaction, boundary);
      // On radial meshes an entry integrates the point kernel over the
      // sphere of radius r_j, so the density conversion divides the shell
      // measure out as well; the bound factors decrease with point
      // separation, so evaluating them at the radial gap |r_i - r_j| (the
      // closest pair of the two spheres) keeps the inequality direction.
      double density =
          green.values(i, j) / mesh.cell_weight(static_cast<int>(j));
      if (radial)
        density /= sphere * std::pow(mesh.node(static_cast<int>(j)),
                                     static_cast<double>(N - 1));
      rep.ratio = std::max(rep.ratio, density / bound);
    }
  }
  return rep;
}

GreenBoundStability green_bound_stability(const Domain& domain,
                                          FractionalOrder alpha,
                                          OperatorKind kind, int m,
                                          double gamma) {
  GreenBoundStability st;
  const GradedMesh coarse = build_mesh(domain, m, gamma);
  const GradedMesh fine = build_mesh(domain, 2 * m, gamma);
  st.coarse =
      green_bound_check(green_matrix(assemble(coarse, alpha, kind)), coarse,
                        alpha);
  st.fine = green_bound_check(green_matrix(assemble(fine, alpha, kind)), fine,
                              alpha);
  st.change = std::abs(st.fine.ratio - st.coarse.ratio) / st.coarse.ratio;
  return st;
}

NonexistenceReport nonexistence_diagnostics(const BlowupResult& result,
                                            const Nonlinearity& f,
                                            FractionalOrder alpha,
                                            const LayerConfig& config) {
  if (!f.is_power() || f.is_zero())
    throw ValidationError("layer diagnostics need a power nonlinearity");
  const double p = f.power_p();
  if (!(p > 1.0))
    throw ValidationError("layer diagnostics need a superlinear power");
  if (result.levels.empty())
    throw ValidationError("layer diagnostics need at least one level");

  const double a = alpha.value;
  NonexistenceReport rep;
  rep.in_regime = p <= 1.0 + 2.0 * a + 1e-12 && p < a / (1.0 - a);
  const double kappa = (2.0 * a - 1.0) / (p - 1.0);
  rep.layer_exponent_predicted = kappa;

  const GradedMesh& mesh = result.levels.front().field.mesh;
  const double center = mesh.domain.kind == DomainKind::Interval
                            ? 0.5 * (mesh.domain.a + mesh.domain.b)
                            : 0.0;
  int ic = 0;
  for (int i = 1; i < mesh.size; ++i)
    if (std::abs(mesh.node(i) - center) < std::abs(mesh.node(ic) - center))
      ic = i;

  rep.center_strictly_increasing = result.levels.size() >= 2;
  for (std::size_t k = 0; k < result.levels.size(); ++k) {
    rep.center_values.push_back(result.levels[k].field.values(ic));
    if (k > 0 && rep.center_values[k] <= rep.center_values[k - 1])
      rep.center_strictly_increasing = false;
  }
  if (result.levels.size() >= 2)
    rep.top_ratio = rep.center_values[rep.center_values.size() - 1] /
                    rep.center_values[rep.center_values.size() - 2];

  // Layer minima against (1/2l) rho^-kappa on (inner r_n, outer r_n] with
  // r_n = (l n)^(-1/kappa).  The slope of log(min) vs log(r_n) does not
  // depend on l, so one intercept pass calibrates it when not configured.
  auto layer_minima = [&](double lambda, std::vector<double>& rs,
                          std::vector<double>& mins, double& bound_dev) {
    rs.clear();
    mins.clear();
    bound_dev = 0.0;
    for (const BlowupLevel& level : result.levels) {
      const double rn = std::pow(lambda * level.n, -1.0 / kappa);
      if (config.outer * rn >= mesh.domain.inradius()) continue;
      double lo = std::numeric_limits<double>::infinity();
      double dev = std::numeric_limits<double>::infinity();
      for (int i = 0; i < mesh.size; ++i) {
        const double rho = mesh.rho(i);
        if (rho <= config.inner * rn || rho > config.outer * rn) continue;
        lo = std::min(lo, level.field.values(i));
        dev = std::min(dev, 2.0 * lambda * level.field.values(i) *
                                std::pow(rho, kappa));
      }
      if (!std::isfinite(lo) || !(lo > 0.0)) continue;
      rs.push_back(rn);
      mins.push_back(lo);
      bound_dev = std::max(bound_dev, std::abs(dev - 1.0));
    }
  };

  std::vector<double> rs, mins;
  double lambda = config.lambda > 0 ? config.lambda : 1.0;
  layer_minima(lambda, rs, mins, rep.max_bound_deviation);
  if (config.lambda <= 0 && rs.size() >= 2) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rs.size(); ++k)
      acc += std::log(mins[k]) + kappa * std::log(rs[k]);
    lambda = 0.5 * std::exp(-acc / static_cast<double>(rs.size()));
    layer_minima(lambda, rs, mins, rep.max_bound_deviation);
  }
  rep.lambda = lambda;

  if (rs.size() >= 2) {
    std::vector<double> lx(rs.size()), ly(rs.size());
    for (std::size_t k = 0; k < rs.size(); ++k) {
      lx[k] = std::log(rs[k]);
      ly[k] = std::log(mins[k]);
    }
    const LogLogFit fit = fit_loglog(lx, ly);
    rep.layer_fit.beta = fit.slope;
    rep.layer_fit.intercept = fit.intercept;
    rep.layer_fit.r_squared = fit.r_squared;
    rep.layer_fit.rho_lo = *std::min_element(rs.begin(), rs.end());
    rep.layer_fit.rho_hi = *std::max_element(rs.begin(), rs.end());
    rep.layer_fit.node_count = static_cast<int>(rs.size());
    rep.layer_exponent_ok = std::abs(std::abs(fit.slope) - kappa) <= 0.15;
  }
  return rep;
}

}  // namespace rflab
