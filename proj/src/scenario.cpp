#include "rflab/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "rflab/errors.hpp"

namespace rflab {
namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.1.0+hat-pv-wide-4";

// The structured divergence signal requires the top-level center value to
// exceed the value four levels below it by this factor (calibrated on the
// implemented scheme; see docs/calibration.md).
constexpr double kGrowthMarkerThreshold = 2.0;
constexpr int kGrowthMarkerLookback = 4;

// Converged ladders must have their top two center values within this
// ratio (calibrated; see docs/calibration.md).
constexpr double kTopRatioThreshold = 1.05;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string verdict_str(TailVerdict v) {
  return v == TailVerdict::Converges ? "converges" : "diverges";
}

int center_node(const GradedMesh& mesh) {
  const double center = mesh.domain.kind == DomainKind::Interval
                            ? 0.5 * (mesh.domain.a + mesh.domain.b)
                            : 0.0;
  int best = 0;
  for (int i = 1; i < mesh.size; ++i) {
    if (std::abs(mesh.node(i) - center) < std::abs(mesh.node(best) - center)) {
      best = i;
    }
  }
  return best;
}

FitWindow scenario_window(const ScenarioConfig& cfg) {
  return FitWindow{cfg.window_rho_lo, cfg.window_rho_hi};
}

json fit_json(const RateFit& fit) {
  return json{{"beta", fit.beta},
              {"intercept", fit.intercept},
              {"r_squared", fit.r_squared},
              {"rho_lo", fit.rho_lo},
              {"rho_hi", fit.rho_hi},
              {"node_count", fit.node_count}};
}

std::string fit_row(const std::string& quantity, const RateFit& fit) {
  return quantity + "," + fmt(fit.rho_lo) + "," + fmt(fit.rho_hi) + "," +
         std::to_string(fit.node_count) + "," + fmt(fit.beta) + "," +
         fmt(fit.intercept) + "," + fmt(fit.r_squared);
}

constexpr const char* kFitHeader =
    "quantity,rho_lo,rho_hi,nodes,beta,intercept,r_squared";

void add_check(Report& rep, const std::string& name, bool pass, double value,
               double threshold, const std::string& note = "") {
  rep.checks.push_back(CheckItem{name, pass, value, threshold, note});
}

// ---------------------------------------------------------------------------
// Per-command pipelines.  Each fills rep.tables / rep.checks and returns the
// command-specific results object.

json run_assemble_check(const ScenarioConfig& cfg, Report& rep) {
  const GradedMesh mesh =
      build_mesh(scenario_domain(cfg), cfg.mesh_m, cfg.mesh_gamma);
  const OperatorMatrix op =
      assemble(mesh, FractionalOrder(cfg.alpha), scenario_operator_kind(cfg));
  const StructureReport srep = structure_report(op);

  const double sign_tol = 1e-10 * srep.max_row_abs_sum;
  add_check(rep, "rowsum-defect-rel", srep.max_rowsum_defect_rel <= 1e-8,
            srep.max_rowsum_defect_rel, 1e-8,
            "row sums against the constant-annihilation target");
  add_check(rep, "diagonal-positive", srep.min_diag > 0.0, srep.min_diag, 0.0);
  add_check(rep, "offdiagonal-sign", srep.max_offdiag <= sign_tol,
            srep.max_offdiag, sign_tol, "couplings must be nonpositive");
  add_check(rep, "trace-coupling-sign", srep.max_boundary_entry <= sign_tol,
            srep.max_boundary_entry, sign_tol);

  CsvTable t;
  t.file_name = cfg.name + "-nodes.csv";
  t.header = "node,x,rho,diagonal,phi";
  for (int i = 0; i < mesh.size; ++i) {
    t.rows.push_back(std::to_string(i) + "," + fmt(mesh.node(i)) + "," +
                     fmt(mesh.rho(i)) + "," + fmt(op.interior(i, i)) + "," +
                     fmt(op.phi_nodes(i)));
  }
  rep.tables.push_back(std::move(t));

  return json{{"min_diag", srep.min_diag},
              {"max_offdiag", srep.max_offdiag},
              {"max_boundary_entry", srep.max_boundary_entry},
              {"max_rowsum_defect_rel", srep.max_rowsum_defect_rel},
              {"max_row_abs_sum", srep.max_row_abs_sum}};
}

json run_phi(const ScenarioConfig& cfg, Report& rep) {
  const Domain domain = scenario_domain(cfg);
  const GradedMesh mesh = build_mesh(domain, cfg.mesh_m, cfg.mesh_gamma);
  const FractionalOrder alpha(cfg.alpha);

  Eigen::VectorXd values(mesh.size);
  for (int i = 0; i < mesh.size; ++i) {
    values(i) = phi(domain, alpha, mesh.node(i));
  }
  const RateFit fit = fit_rate(mesh, values, scenario_window(cfg));
  const double predicted = -2.0 * cfg.alpha;
  add_check(rep, "phi-exponent", std::abs(fit.beta - predicted) <= 0.05,
            fit.beta, 0.05, "predicted slope " + fmt_label(predicted));

  CsvTable t;
  t.file_name = cfg.name + "-profile.csv";
  t.header = "x,rho,phi";
  for (int i = 0; i < mesh.size; ++i) {
    t.rows.push_back(fmt(mesh.node(i)) + "," + fmt(mesh.rho(i)) + "," +
                     fmt(values(i)));
  }
  rep.tables.push_back(std::move(t));

  CsvTable f;
  f.file_name = cfg.name + "-fits.csv";
  f.header = kFitHeader;
  f.rows.push_back(fit_row("phi", fit));
  rep.tables.push_back(std::move(f));

  return json{{"fit", fit_json(fit)}, {"predicted_slope", predicted}};
}

json run_solve(const ScenarioConfig& cfg, Report& rep) {
  const GradedMesh mesh =
      build_mesh(scenario_domain(cfg), cfg.mesh_m, cfg.mesh_gamma);
  const FractionalOrder alpha(cfg.alpha);
  const OperatorMatrix op = assemble(mesh, alpha, scenario_operator_kind(cfg));
  const Nonlinearity f = scenario_nonlinearity(cfg);

  SourceField source = SourceField::zero(mesh, cfg.trace_constant);
  source.interior.setConstant(cfg.source_constant);

  const StructureReport srep = structure_report(op);
  SolutionField u;
  if (f.is_zero()) {
    u = solve_linear_dirichlet(op, source);
    const double scale =
        1.0 + u.values.cwiseAbs().maxCoeff() + std::abs(cfg.trace_constant);
    add_check(rep, "final-residual",
              u.final_residual <= 1e-8 * srep.max_row_abs_sum * scale,
              u.final_residual, 1e-8 * srep.max_row_abs_sum * scale);
  } else {
    u = solve_semilinear(op, f, source, scenario_solver(cfg));
    const double scale = 1.0 + u.values.cwiseAbs().maxCoeff();
    const double thr = 1e3 * (u.b2 + 1.0) * cfg.tol_fixed_point * scale;
    add_check(rep, "final-residual", u.final_residual <= thr, u.final_residual,
              thr, "stop-tolerance consistency of the fixed point");
    add_check(rep, "monotone-steps", u.monotone, u.min_step_delta, -1e-10);
  }

  json results{{"iterations", u.iterations},
               {"final_residual", u.final_residual},
               {"min_step_delta", u.min_step_delta},
               {"b1", u.b1},
               {"b2", u.b2},
               {"sup_value", u.values.cwiseAbs().maxCoeff()}};

  CsvTable t;
  t.file_name = cfg.name + "-profile.csv";
  t.header = "x,rho,u";
  for (int i = 0; i < mesh.size; ++i) {
    t.rows.push_back(fmt(mesh.node(i)) + "," + fmt(mesh.rho(i)) + "," +
                     fmt(u.values(i)));
  }
  rep.tables.push_back(std::move(t));

  // Boundary decay of the deficit n - u for finite-trace semilinear solves
  // with the regional operator: predicted exponent 2 alpha - 1.
  if (!f.is_zero() && cfg.trace_constant > 0.0 &&
      op.kind == OperatorKind::Regional) {
    const Eigen::VectorXd deficit =
        Eigen::VectorXd::Constant(mesh.size, cfg.trace_constant) - u.values;
    const RateFit fit = fit_rate(mesh, deficit, scenario_window(cfg));
    const double predicted = 2.0 * cfg.alpha - 1.0;
    add_check(rep, "deficit-exponent", std::abs(fit.beta - predicted) <= 0.1,
              fit.beta, 0.1, "predicted exponent " + fmt_label(predicted));

    CsvTable ft;
    ft.file_name = cfg.name + "-fits.csv";
    ft.header = kFitHeader;
    ft.rows.push_back(fit_row("trace-deficit", fit));
    rep.tables.push_back(std::move(ft));
    results["deficit_fit"] = fit_json(fit);
    results["deficit_predicted"] = predicted;
  }
  return results;
}

json blowup_results(const ScenarioConfig& cfg, const GradedMesh& mesh,
                    const Nonlinearity& f, const BlowupResult& result,
                    Report& rep, bool add_limit_checks) {
  const int cidx = center_node(mesh);
  const FractionalOrder alpha(cfg.alpha);

  json levels = json::array();
  double min_nodewise = std::numeric_limits<double>::infinity();
  double min_step = std::numeric_limits<double>::infinity();
  double magnitude = 1.0;
  for (std::size_t k = 0; k < result.levels.size(); ++k) {
    const BlowupLevel& lv = result.levels[k];
    min_step = std::min(min_step, lv.field.min_step_delta);
    magnitude = std::max(magnitude, lv.field.values.cwiseAbs().maxCoeff());
    if (k > 0) {
      min_nodewise = std::min(
          min_nodewise,
          (lv.field.values - result.levels[k - 1].field.values).minCoeff());
    }
    levels.push_back(json{{"n", lv.n},
                          {"iterations", lv.field.iterations},
                          {"residual", lv.field.final_residual},
                          {"center_value", lv.field.values(cidx)},
                          {"interior_gap", lv.interior_gap},
                          {"interior_gap_rel", lv.interior_gap_rel},
                          {"b2", lv.field.b2}});
  }
  if (result.levels.size() < 2) {
    min_nodewise = 0.0;
  }

  // The monotonicity gates follow the solver's own step certificate: the
  // absolute floor is widened by the iterate magnitude so that ladders with
  // large boundary data are judged against rounding at their own scale.
  const double step_tol = 1e-10 + 1e-12 * magnitude;
  add_check(rep, "levels-nondecreasing", min_nodewise >= -step_tol,
            min_nodewise, -step_tol,
            "comparison principle across boundary levels");
  add_check(rep, "iteration-monotone", min_step >= -step_tol, min_step,
            -step_tol, "most adverse step over all level solves");

  const NonexistenceReport diag = nonexistence_diagnostics(result, f, alpha);
  const std::string outcome = result.converged    ? "converged"
                              : result.diverged   ? "diverged"
                                                  : "exhausted";
  if (add_limit_checks) {
    if (result.diverged) {
      const int top = static_cast<int>(result.levels.size()) - 1;
      const int ref = std::max(0, top - kGrowthMarkerLookback);
      const double growth =
          diag.center_values[static_cast<std::size_t>(top)] /
          std::max(diag.center_values[static_cast<std::size_t>(ref)], 1e-300);
      const bool signal = diag.center_strictly_increasing &&
                          growth >= kGrowthMarkerThreshold;
      add_check(rep, "nonexistence-signal", signal, growth,
                kGrowthMarkerThreshold,
                "divergent ladder with strictly growing center values");
      if (diag.in_regime) {
        add_check(rep, "layer-exponent", diag.layer_exponent_ok,
                  diag.layer_fit.beta, 0.15,
                  "predicted -" + fmt_label(diag.layer_exponent_predicted));
      }
    } else {
      add_check(rep, "limit-converged", result.converged, result.final_gap,
                cfg.tol_limit,
                result.converged ? "" : "level cap reached without a verdict");
      if (result.converged) {
        add_check(rep, "top-ratio", diag.top_ratio <= kTopRatioThreshold,
                  diag.top_ratio, kTopRatioThreshold,
                  "top two center values of a converged ladder");
      }
    }
  }

  CsvTable prof;
  prof.file_name = cfg.name + "-profiles.csv";
  prof.header = "x,rho";
  for (const BlowupLevel& lv : result.levels) {
    prof.header += ",u_" + fmt_label(lv.n);
  }
  for (int i = 0; i < mesh.size; ++i) {
    std::string row = fmt(mesh.node(i)) + "," + fmt(mesh.rho(i));
    for (const BlowupLevel& lv : result.levels) {
      row += "," + fmt(lv.field.values(i));
    }
    prof.rows.push_back(std::move(row));
  }
  rep.tables.push_back(std::move(prof));

  CsvTable lt;
  lt.file_name = cfg.name + "-levels.csv";
  lt.header = "n,iterations,residual,center_value,interior_gap,interior_gap_rel";
  for (const BlowupLevel& lv : result.levels) {
    lt.rows.push_back(fmt(lv.n) + "," + std::to_string(lv.field.iterations) +
                      "," + fmt(lv.field.final_residual) + "," +
                      fmt(lv.field.values(cidx)) + "," + fmt(lv.interior_gap) +
                      "," + fmt(lv.interior_gap_rel));
  }
  rep.tables.push_back(std::move(lt));

  json nonexist{{"in_regime", diag.in_regime},
                {"lambda", diag.lambda},
                {"layer_exponent_predicted", diag.layer_exponent_predicted},
                {"layer_exponent_ok", diag.layer_exponent_ok},
                {"max_bound_deviation", diag.max_bound_deviation},
                {"center_strictly_increasing", diag.center_strictly_increasing},
                {"top_ratio", diag.top_ratio}};
  if (diag.layer_fit.node_count > 0) {
    nonexist["layer_fit"] = fit_json(diag.layer_fit);
  }

  return json{{"levels", levels},
              {"limit",
               json{{"outcome", outcome},
                    {"final_gap", result.final_gap},
                    {"window_rho", result.window_rho}}},
              {"nonexistence", nonexist}};
}

json run_blowup(const ScenarioConfig& cfg, Report& rep) {
  const GradedMesh mesh =
      build_mesh(scenario_domain(cfg), cfg.mesh_m, cfg.mesh_gamma);
  const OperatorMatrix op =
      assemble(mesh, FractionalOrder(cfg.alpha), scenario_operator_kind(cfg));
  const Nonlinearity f = scenario_nonlinearity(cfg);
  const BlowupResult result = blowup_limit(op, f, scenario_solver(cfg));
  return blowup_results(cfg, mesh, f, result, rep, /*add_limit_checks=*/true);
}

json run_rates(const ScenarioConfig& cfg, Report& rep) {
  const GradedMesh mesh =
      build_mesh(scenario_domain(cfg), cfg.mesh_m, cfg.mesh_gamma);
  const FractionalOrder alpha(cfg.alpha);
  const OperatorMatrix op = assemble(mesh, alpha, scenario_operator_kind(cfg));
  const Nonlinearity f = scenario_nonlinearity(cfg);
  const BlowupResult result = blowup_limit(op, f, scenario_solver(cfg));

  json results =
      blowup_results(cfg, mesh, f, result, rep, /*add_limit_checks=*/false);

  const SolutionField& top = result.levels.back().field;
  const SandwichVerdict verdict =
      sandwich_verdict(top, f, alpha, -1.0, scenario_window(cfg));
  add_check(rep, "sandwich", verdict.pass, std::abs(verdict.fitted.beta),
            verdict.inflation,
            "predicted [" + fmt_label(verdict.predicted_lower) + ", " +
                fmt_label(verdict.predicted_upper) + "]");

  // Self-consistency: halving the fit window must not move the exponent.
  FitWindow half{verdict.fitted.rho_lo,
                 verdict.fitted.rho_lo +
                     0.5 * (verdict.fitted.rho_hi - verdict.fitted.rho_lo)};
  const RateFit half_fit = fit_rate(top, half);
  add_check(rep, "window-halving",
            std::abs(half_fit.beta - verdict.fitted.beta) < 0.05,
            std::abs(half_fit.beta - verdict.fitted.beta), 0.05);

  CsvTable ft;
  ft.file_name = cfg.name + "-fits.csv";
  ft.header = kFitHeader;
  ft.rows.push_back(fit_row("blowup-rate", verdict.fitted));
  ft.rows.push_back(fit_row("blowup-rate-halfwindow", half_fit));
  rep.tables.push_back(std::move(ft));

  results["sandwich"] = json{{"predicted_lower", verdict.predicted_lower},
                             {"predicted_upper", verdict.predicted_upper},
                             {"inflation", verdict.inflation},
                             {"pass", verdict.pass},
                             {"fit", fit_json(verdict.fitted)}};
  results["halfwindow_fit"] = fit_json(half_fit);
  return results;
}

json run_ko(const ScenarioConfig& cfg, Report& rep) {
  const FractionalOrder alpha(cfg.alpha);
  json entries = json::array();
  CsvTable t;
  t.file_name = cfg.name + "-ko.csv";
  t.header = "p,kappa,ko_numeric,ko_analytic,tail_numeric,tail_analytic,match";
  int mismatches = 0;
  for (double p : cfg.ko_powers) {
    const KOReport r = ko_classify(Nonlinearity::power(cfg.f_c, p), alpha);
    if (!r.matches_analytic) ++mismatches;
    t.rows.push_back(fmt_label(p) + "," + fmt(r.kappa) + "," +
                     verdict_str(r.ko_verdict) + "," +
                     verdict_str(r.ko_analytic) + "," +
                     verdict_str(r.tail_cond_verdict) + "," +
                     verdict_str(r.cond_analytic) + "," +
                     (r.matches_analytic ? "yes" : "no"));
    entries.push_back(json{{"p", p},
                           {"kappa", r.kappa},
                           {"ko_numeric", verdict_str(r.ko_verdict)},
                           {"ko_analytic", verdict_str(r.ko_analytic)},
                           {"tail_numeric", verdict_str(r.tail_cond_verdict)},
                           {"tail_analytic", verdict_str(r.cond_analytic)},
                           {"ko_ratio", r.ko_ratio},
                           {"cond_ratio", r.cond_ratio},
                           {"match", r.matches_analytic}});
  }
  rep.tables.push_back(std::move(t));
  add_check(rep, "ko-analytic-agreement", mismatches == 0,
            static_cast<double>(mismatches), 0.0,
            "numeric tail classification vs power-integral thresholds");
  return json{{"classifications", entries}};
}

json run_green_check(const ScenarioConfig& cfg, Report& rep) {
  const GreenBoundStability stab = green_bound_stability(
      scenario_domain(cfg), FractionalOrder(cfg.alpha),
      scenario_operator_kind(cfg), cfg.mesh_m, cfg.mesh_gamma);

  add_check(rep, "ratio-finite",
            std::isfinite(stab.coarse.ratio) && stab.coarse.ratio > 0.0,
            stab.coarse.ratio, 0.0);
  add_check(rep, "refinement-change", stab.change < 0.25, stab.change, 0.25,
            "bound ratio under one mesh doubling");
  const double worst_entry =
      std::min(stab.coarse.min_entry, stab.fine.min_entry);
  add_check(rep, "entrywise-nonnegative",
            stab.coarse.nonnegative && stab.fine.nonnegative, worst_entry,
            -1e-10 * std::max(stab.coarse.max_entry, stab.fine.max_entry));

  CsvTable t;
  t.file_name = cfg.name + "-green.csv";
  t.header = "resolution,ratio,min_entry,max_entry";
  t.rows.push_back(std::to_string(cfg.mesh_m) + "," + fmt(stab.coarse.ratio) +
                   "," + fmt(stab.coarse.min_entry) + "," +
                   fmt(stab.coarse.max_entry));
  t.rows.push_back(std::to_string(2 * cfg.mesh_m) + "," +
                   fmt(stab.fine.ratio) + "," + fmt(stab.fine.min_entry) +
                   "," + fmt(stab.fine.max_entry));
  rep.tables.push_back(std::move(t));

  return json{
      {"coarse", json{{"ratio", stab.coarse.ratio},
                      {"min_entry", stab.coarse.min_entry},
                      {"max_entry", stab.coarse.max_entry}}},
      {"fine", json{{"ratio", stab.fine.ratio},
                    {"min_entry", stab.fine.min_entry},
                    {"max_entry", stab.fine.max_entry}}},
      {"change", stab.change}};
}

json run_barrier_check(const ScenarioConfig& cfg, Report& rep) {
  const GradedMesh mesh =
      build_mesh(scenario_domain(cfg), cfg.mesh_m, cfg.mesh_gamma);
  const FractionalOrder alpha(cfg.alpha);
  const OperatorMatrix op = assemble(mesh, alpha, scenario_operator_kind(cfg));
  const Barrier barrier = build_barrier(mesh, cfg.tau, cfg.barrier_t0);
  const BarrierBoundReport brep = certify_barrier_bound(op, barrier);

  add_check(rep, "bound-stability", brep.refinement_change < 0.20,
            brep.refinement_change, 0.20,
            "sup |applied| rho^{2a-tau} under one mesh doubling");
  add_check(rep, "operator-consistency", brep.max_consistency_residual <= 1e-6,
            brep.max_consistency_residual, 1e-6,
            "full vs regional + exterior-mass identity");

  CsvTable t;
  t.file_name = cfg.name + "-barrier.csv";
  t.header = "x,rho,v,applied,bound_profile";
  for (int i = 0; i < mesh.size; ++i) {
    const auto k = static_cast<std::size_t>(i);
    t.rows.push_back(fmt(mesh.node(i)) + "," + fmt(mesh.rho(i)) + "," +
                     fmt(barrier.node_values[k]) + "," + fmt(brep.applied[k]) +
                     "," + fmt(brep.profile_m[k]));
  }
  rep.tables.push_back(std::move(t));

  json results{{"sup_m", brep.sup_m},
               {"sup_m_refined", brep.sup_m_refined},
               {"refinement_change", brep.refinement_change},
               {"max_consistency_residual", brep.max_consistency_residual}};

  const Nonlinearity f = scenario_nonlinearity(cfg);
  if (!f.is_zero() && f.power_p() > 1.0) {
    // Squeeze the blow-up limit from above by a barrier multiple.
    const SolverConfig solver = scenario_solver(cfg);
    const BlowupResult result = blowup_limit(op, f, solver);
    const SolutionField& u = result.levels.back().field;
    const MinimalityReport min_rep =
        minimality_check(op, f, barrier, u, cfg.lambda0, solver);

    add_check(rep, "supersolution-lambda",
              min_rep.certified && min_rep.lambda <= 1024.0, min_rep.lambda,
              1024.0, "smallest certifying barrier multiple");
    add_check(rep, "barrier-domination", min_rep.sup_gap_barrier <= 1e-8,
              min_rep.sup_gap_barrier, 1e-8, "u <= lambda V nodewise");
    add_check(rep, "decreasing-excess", min_rep.max_excess <= 1e-8,
              min_rep.max_excess, 1e-8,
              "u against the decreasing-iteration limit");
    add_check(rep, "two-lambda-agreement",
              min_rep.two_lambda_gap <= 10.0 * cfg.tol_limit,
              min_rep.two_lambda_gap, 10.0 * cfg.tol_limit,
              "limits from lambda and 2 lambda starts");

    results["minimality"] =
        json{{"lambda", min_rep.lambda},
             {"certified", min_rep.certified},
             {"pre_residual_min", min_rep.pre_residual_min},
             {"max_excess", min_rep.max_excess},
             {"sup_gap_barrier", min_rep.sup_gap_barrier},
             {"two_lambda_gap", min_rep.two_lambda_gap},
             {"levels", result.levels.size()},
             {"limit_outcome", result.converged    ? "converged"
                               : result.diverged   ? "diverged"
                                                   : "exhausted"}};
  }
  return results;
}

}  // namespace

Domain scenario_domain(const ScenarioConfig& cfg) {
  if (cfg.domain_kind == "interval") {
    return Domain::interval(cfg.interval_a, cfg.interval_b);
  }
  if (cfg.domain_kind == "ball") {
    return Domain::ball(cfg.ball_radius, cfg.ball_dim);
  }
  throw ValidationError("unknown domain kind: " + cfg.domain_kind);
}

Nonlinearity scenario_nonlinearity(const ScenarioConfig& cfg) {
  if (cfg.f_family == "zero") return Nonlinearity::zero();
  if (cfg.f_family == "power") return Nonlinearity::power(cfg.f_c, cfg.f_p);
  throw ValidationError("unknown nonlinearity family: " + cfg.f_family);
}

SolverConfig scenario_solver(const ScenarioConfig& cfg) {
  SolverConfig sc;
  if (cfg.policy == "adaptive") {
    sc.policy = StiffnessPolicy::Adaptive;
  } else if (cfg.policy == "derivative-bound") {
    sc.policy = StiffnessPolicy::DerivativeBound;
  } else {
    throw ValidationError("unknown stiffness policy: " + cfg.policy);
  }
  sc.tol_fixed_point = cfg.tol_fixed_point;
  sc.max_iter = cfg.max_iter;
  sc.n0 = cfg.n0;
  sc.level_factor = cfg.level_factor;
  sc.n_cap = cfg.n_cap;
  sc.tol_limit = cfg.tol_limit;
  sc.interior_window = cfg.interior_window;
  sc.divergence_streak = cfg.divergence_streak;
  return sc;
}

OperatorKind scenario_operator_kind(const ScenarioConfig& cfg) {
  if (cfg.operator_kind == "regional") return OperatorKind::Regional;
  if (cfg.operator_kind == "full") return OperatorKind::Full;
  throw ValidationError("unknown operator kind: " + cfg.operator_kind);
}

ScenarioConfig parse_config(const std::string& json_text) {
  ScenarioConfig cfg;
  try {
    const json j = json::parse(json_text);
    cfg.name = j.value("name", cfg.name);
    cfg.command = j.value("command", cfg.command);
    if (j.contains("domain")) {
      const json& d = j.at("domain");
      cfg.domain_kind = d.value("kind", cfg.domain_kind);
      cfg.interval_a = d.value("a", cfg.interval_a);
      cfg.interval_b = d.value("b", cfg.interval_b);
      cfg.ball_radius = d.value("radius", cfg.ball_radius);
      cfg.ball_dim = d.value("dim", cfg.ball_dim);
    }
    cfg.alpha = j.value("alpha", cfg.alpha);
    if (j.contains("mesh")) {
      const json& m = j.at("mesh");
      cfg.mesh_m = m.value("m", cfg.mesh_m);
      cfg.mesh_gamma = m.value("gamma", cfg.mesh_gamma);
    }
    cfg.operator_kind = j.value("operator", cfg.operator_kind);
    if (j.contains("nonlinearity")) {
      const json& f = j.at("nonlinearity");
      cfg.f_family = f.value("family", cfg.f_family);
      cfg.f_c = f.value("c", cfg.f_c);
      cfg.f_p = f.value("p", cfg.f_p);
    }
    if (j.contains("source")) {
      cfg.source_constant = j.at("source").value("constant", cfg.source_constant);
    }
    if (j.contains("trace")) {
      cfg.trace_constant = j.at("trace").value("constant", cfg.trace_constant);
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      cfg.policy = s.value("policy", cfg.policy);
      cfg.tol_fixed_point = s.value("tol_fixed_point", cfg.tol_fixed_point);
      cfg.max_iter = s.value("max_iter", cfg.max_iter);
      cfg.n0 = s.value("n0", cfg.n0);
      cfg.level_factor = s.value("level_factor", cfg.level_factor);
      cfg.n_cap = s.value("n_cap", cfg.n_cap);
      cfg.tol_limit = s.value("tol_limit", cfg.tol_limit);
      cfg.interior_window = s.value("interior_window", cfg.interior_window);
      cfg.divergence_streak = s.value("divergence_streak", cfg.divergence_streak);
    }
    if (j.contains("analysis")) {
      const json& a = j.at("analysis");
      cfg.window_rho_lo = a.value("rho_lo", cfg.window_rho_lo);
      cfg.window_rho_hi = a.value("rho_hi", cfg.window_rho_hi);
    }
    if (j.contains("barrier")) {
      const json& b = j.at("barrier");
      cfg.tau = b.value("tau", cfg.tau);
      cfg.barrier_t0 = b.value("t0", cfg.barrier_t0);
      cfg.lambda0 = b.value("lambda0", cfg.lambda0);
    }
    if (j.contains("ko")) {
      cfg.ko_powers =
          j.at("ko").value("powers", cfg.ko_powers);
    }
    if (j.contains("output")) {
      const json& o = j.at("output");
      cfg.out_dir = o.value("dir", cfg.out_dir);
      cfg.write_csv = o.value("csv", cfg.write_csv);
      cfg.write_json = o.value("json", cfg.write_json);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config parse: ") + e.what());
  }
  return cfg;
}

std::string emit_config(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["command"] = cfg.command;
  j["domain"] = json{{"kind", cfg.domain_kind},
                     {"a", cfg.interval_a},
                     {"b", cfg.interval_b},
                     {"radius", cfg.ball_radius},
                     {"dim", cfg.ball_dim}};
  j["alpha"] = cfg.alpha;
  j["mesh"] = json{{"m", cfg.mesh_m}, {"gamma", cfg.mesh_gamma}};
  j["operator"] = cfg.operator_kind;
  j["nonlinearity"] =
      json{{"family", cfg.f_family}, {"c", cfg.f_c}, {"p", cfg.f_p}};
  j["source"] = json{{"constant", cfg.source_constant}};
  j["trace"] = json{{"constant", cfg.trace_constant}};
  j["solver"] = json{{"policy", cfg.policy},
                     {"tol_fixed_point", cfg.tol_fixed_point},
                     {"max_iter", cfg.max_iter},
                     {"n0", cfg.n0},
                     {"level_factor", cfg.level_factor},
                     {"n_cap", cfg.n_cap},
                     {"tol_limit", cfg.tol_limit},
                     {"interior_window", cfg.interior_window},
                     {"divergence_streak", cfg.divergence_streak}};
  j["analysis"] =
      json{{"rho_lo", cfg.window_rho_lo}, {"rho_hi", cfg.window_rho_hi}};
  j["barrier"] = json{
      {"tau", cfg.tau}, {"t0", cfg.barrier_t0}, {"lambda0", cfg.lambda0}};
  j["ko"] = json{{"powers", cfg.ko_powers}};
  j["output"] = json{{"dir", cfg.out_dir},
                     {"csv", cfg.write_csv},
                     {"json", cfg.write_json}};
  return j.dump(2) + "\n";
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open config file: " + path);
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

void validate_config(const ScenarioConfig& cfg) {
  static const std::set<std::string> kCommands{
      "assemble-check", "phi",          "solve", "blowup",
      "rates",          "ko",           "green-check", "barrier-check"};
  if (!kCommands.count(cfg.command)) {
    throw ValidationError("unknown command: " + cfg.command);
  }
  const Domain domain = scenario_domain(cfg);  // validates the domain tag
  if (cfg.domain_kind == "interval" && !(cfg.interval_a < cfg.interval_b)) {
    throw ValidationError("interval endpoints must satisfy a < b");
  }
  if (cfg.domain_kind == "ball" &&
      (cfg.ball_radius <= 0.0 || cfg.ball_dim < 1)) {
    throw ValidationError("ball needs radius > 0 and dim >= 1");
  }
  const FractionalOrder alpha(cfg.alpha);  // validates (0, 1)
  if (cfg.mesh_m < 4) {
    throw ValidationError("mesh size m must be at least 4");
  }
  if (cfg.mesh_gamma < 1.0) {
    throw ValidationError("mesh grading gamma must be at least 1");
  }
  const OperatorKind kind = scenario_operator_kind(cfg);
  const Nonlinearity f = scenario_nonlinearity(cfg);
  if (cfg.f_family == "power" && (cfg.f_c < 0.0 || cfg.f_p <= 0.0)) {
    throw ValidationError("power nonlinearity needs c >= 0 and p > 0");
  }
  (void)scenario_solver(cfg);  // validates the policy tag
  if (cfg.tol_fixed_point <= 0.0 || cfg.tol_limit <= 0.0) {
    throw ValidationError("tolerances must be positive");
  }
  if (cfg.max_iter < 1 || cfg.divergence_streak < 2) {
    throw ValidationError("max_iter >= 1 and divergence_streak >= 2 required");
  }
  if (cfg.n0 <= 0.0 || cfg.level_factor <= 1.0 || cfg.n_cap < cfg.n0) {
    throw ValidationError("level schedule needs n0 > 0, factor > 1, cap >= n0");
  }
  if (cfg.window_rho_lo > 0.0 && cfg.window_rho_hi > 0.0 &&
      cfg.window_rho_lo >= cfg.window_rho_hi) {
    throw ValidationError("analysis window needs rho_lo < rho_hi");
  }

  const bool blowup_like = cfg.command == "blowup" || cfg.command == "rates";
  const bool barrier_semilinear =
      cfg.command == "barrier-check" && !f.is_zero();
  if (blowup_like || barrier_semilinear) {
    if (f.is_zero() && blowup_like) {
      throw ValidationError(cfg.command +
                            " needs a superlinear power nonlinearity");
    }
    if (!f.is_zero() && f.power_p() <= 1.0) {
      throw ValidationError("blow-up limits need a power exponent p > 1");
    }
    if (kind == OperatorKind::Regional && !alpha.above_half()) {
      throw ValidationError(
          "regional blow-up limits require alpha > 1/2");
    }
  }
  if (cfg.command == "green-check") {
    if (kind != OperatorKind::Regional) {
      throw ValidationError("green-check runs on the regional operator");
    }
    if (!alpha.above_half()) {
      throw ValidationError("green-check requires alpha > 1/2");
    }
  }
  if (cfg.command == "barrier-check") {
    if (!(cfg.tau > -1.0 && cfg.tau < 0.0)) {
      throw ValidationError("barrier exponent tau must lie in (-1, 0)");
    }
    if (!(cfg.barrier_t0 > 0.0 && cfg.barrier_t0 < domain.inradius())) {
      throw ValidationError("barrier junction t0 must lie in (0, inradius)");
    }
    if (cfg.lambda0 <= 0.0) {
      throw ValidationError("lambda0 must be positive");
    }
  }
  if (cfg.command == "ko") {
    if (cfg.ko_powers.empty()) {
      throw ValidationError("ko needs a nonempty power list");
    }
    for (double p : cfg.ko_powers) {
      if (p <= 0.0) {
        throw ValidationError("ko powers must be positive");
      }
    }
  }
}

std::string CsvTable::bytes() const {
  std::string out = header;
  out += '\n';
  for (const std::string& row : rows) {
    out += row;
    out += '\n';
  }
  return out;
}

Report run_scenario(const ScenarioConfig& cfg) {
  Report rep;
  rep.scenario = cfg;
  rep.version = kVersion;
  const auto start = std::chrono::steady_clock::now();
  json results;
  try {
    validate_config(cfg);
    if (cfg.command == "assemble-check") {
      results = run_assemble_check(cfg, rep);
    } else if (cfg.command == "phi") {
      results = run_phi(cfg, rep);
    } else if (cfg.command == "solve") {
      results = run_solve(cfg, rep);
    } else if (cfg.command == "blowup") {
      results = run_blowup(cfg, rep);
    } else if (cfg.command == "rates") {
      results = run_rates(cfg, rep);
    } else if (cfg.command == "ko") {
      results = run_ko(cfg, rep);
    } else if (cfg.command == "green-check") {
      results = run_green_check(cfg, rep);
    } else {
      results = run_barrier_check(cfg, rep);
    }
  } catch (const ValidationError& e) {
    throw ValidationError("scenario '" + cfg.name + "': " + e.what());
  } catch (const NonconvergenceError& e) {
    throw NonconvergenceError("scenario '" + cfg.name + "': " + e.what(),
                              e.residual());
  } catch (const InvariantBreachError& e) {
    throw InvariantBreachError("scenario '" + cfg.name + "': " + e.what());
  }
  const auto stop = std::chrono::steady_clock::now();
  rep.timing_ms =
      std::chrono::duration<double, std::milli>(stop - start).count();
  rep.results_json = results.dump();
  return rep;
}

std::string report_json(const Report& report) {
  json j;
  j["scenario"] = json::parse(emit_config(report.scenario));
  j["results"] = report.results_json.empty()
                     ? json::object()
                     : json::parse(report.results_json);
  json checks = json::array();
  for (const CheckItem& c : report.checks) {
    checks.push_back(json{{"name", c.name},
                          {"pass", c.pass},
                          {"value", c.value},
                          {"threshold", c.threshold},
                          {"note", c.note}});
  }
  j["checks"] = checks;
  j["timing_ms"] = report.timing_ms;
  j["version"] = report.version;
  return j.dump(2) + "\n";
}

std::vector<std::string> emit_tables(const Report& report,
                                     const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  fs::create_directories(dir);
  auto write_file = [&](const std::string& name, const std::string& bytes) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ValidationError("cannot write output file: " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    written.push_back(path.string());
  };
  if (report.scenario.write_csv) {
    for (const CsvTable& t : report.tables) {
      write_file(t.file_name, t.bytes());
    }
  }
  if (report.scenario.write_json) {
    write_file(report.scenario.name + "-report.json", report_json(report));
  }
  return written;
}

}  // namespace rflab
