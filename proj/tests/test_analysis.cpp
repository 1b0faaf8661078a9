#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rflab/analysis.hpp"
#include "rflab/errors.hpp"

using namespace rflab;

namespace {

GradedMesh unit_mesh(int m = 96, double gamma = 3.0) {
  return build_mesh(Domain::interval(-1.0, 1.0), m, gamma);
}

Eigen::VectorXd power_values(const GradedMesh& mesh, double c, double beta) {
  Eigen::VectorXd v(mesh.size);
  for (int i = 0; i < mesh.size; ++i) v(i) = c * std::pow(mesh.rho(i), beta);
  return v;
}

SolutionField synthetic_field(const GradedMesh& mesh, OperatorKind kind,
                              const Eigen::VectorXd& values) {
  SolutionField u;
  u.mesh = mesh;
  u.kind = kind;
  u.values = values;
  u.trace = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(mesh.boundary_nodes.size()));
  return u;
}

}  // namespace

TEST_CASE("power-law fit recovers exact synthetic data") {
  const GradedMesh mesh = unit_mesh();
  const RateFit fit = fit_rate(mesh, power_values(mesh, 3.0, -0.3));
  CHECK(fit.beta == doctest::Approx(-0.3).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  CHECK(fit.r_squared >= 1.0 - 1e-12);
  CHECK(fit.node_count >= 6);
  // Default window.
  CHECK(fit.rho_lo == doctest::Approx(5.0 * mesh.h_min()));
  CHECK(fit.rho_hi == doctest::Approx(0.2));
}

TEST_CASE("fit ignores nodes outside the window") {
  const GradedMesh mesh = unit_mesh();
  Eigen::VectorXd v = power_values(mesh, 1.0, -0.5);
  for (int i = 0; i < mesh.size; ++i) {
    if (mesh.rho(i) < 0.01 || mesh.rho(i) > 0.15) v(i) = -7.0;  // poisoned
  }
  const RateFit fit = fit_rate(mesh, v, FitWindow{0.01, 0.15});
  CHECK(fit.beta == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(fit.rho_lo == doctest::Approx(0.01));
  CHECK(fit.rho_hi == doctest::Approx(0.15));
}

TEST_CASE("fit input validation") {
  const GradedMesh mesh = unit_mesh();
  const Eigen::VectorXd good = power_values(mesh, 1.0, -0.5);
  CHECK_THROWS_AS(fit_rate(mesh, Eigen::VectorXd::Ones(7)), ValidationError);
  CHECK_THROWS_AS(fit_rate(mesh, good, FitWindow{0.5, 0.2}), ValidationError);
  // Window so narrow that fewer than six nodes survive.
  CHECK_THROWS_AS(fit_rate(mesh, good, FitWindow{0.4999, 0.5001}),
                  ValidationError);
  // Nonpositive data inside the window.
  Eigen::VectorXd bad = good;
  for (int i = 0; i < mesh.size; ++i)
    if (mesh.rho(i) > 0.05 && mesh.rho(i) < 0.15) bad(i) = 0.0;
  CHECK_THROWS_AS(fit_rate(mesh, bad), ValidationError);
}

TEST_CASE("rate interval endpoints and verdicts") {
  const GradedMesh mesh = unit_mesh();
  const FractionalOrder alpha(0.75);
  const Nonlinearity f = Nonlinearity::power(1.0, 4.0);

  SUBCASE("regional: interval [ (2a-1)/(p-1), 2a/(p-1) ]") {
    const SolutionField u = synthetic_field(
        mesh, OperatorKind::Regional, power_values(mesh, 1.0, -0.3));
    const SandwichVerdict v = sandwich_verdict(u, f, alpha);
    CHECK(v.predicted_lower == doctest::Approx(0.5 / 3.0).epsilon(1e-12));
    CHECK(v.predicted_upper == doctest::Approx(1.5 / 3.0).epsilon(1e-12));
    CHECK(v.inflation == doctest::Approx(0.05));
    CHECK(v.fitted.beta == doctest::Approx(-0.3).epsilon(1e-9));
    CHECK(v.pass);
  }
  SUBCASE("regional: exponent outside the inflated interval fails") {
    const SolutionField u = synthetic_field(
        mesh, OperatorKind::Regional, power_values(mesh, 1.0, -0.7));
    CHECK_FALSE(sandwich_verdict(u, f, alpha).pass);
    const SolutionField v = synthetic_field(
        mesh, OperatorKind::Regional, power_values(mesh, 1.0, -0.05));
    CHECK_FALSE(sandwich_verdict(v, f, alpha).pass);
  }
  SUBCASE("full: single matching exponent 2a/(p-1)") {
    const SolutionField u = synthetic_field(mesh, OperatorKind::Full,
                                            power_values(mesh, 1.0, -0.5));
    const SandwichVerdict v = sandwich_verdict(u, f, alpha);
    CHECK(v.predicted_lower == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v.predicted_upper == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v.inflation == doctest::Approx(0.1));
    CHECK(v.pass);
    const SolutionField w = synthetic_field(mesh, OperatorKind::Full,
                                            power_values(mesh, 1.0, -0.35));
    CHECK_FALSE(sandwich_verdict(w, f, alpha).pass);
  }
  SUBCASE("explicit inflation overrides the default") {
    const SolutionField u = synthetic_field(mesh, OperatorKind::Full,
                                            power_values(mesh, 1.0, -0.35));
    const SandwichVerdict v = sandwich_verdict(u, f, alpha, 0.2);
    CHECK(v.inflation == doctest::Approx(0.2));
    CHECK(v.pass);
  }
  SUBCASE("only superlinear powers are admissible") {
    const SolutionField u = synthetic_field(
        mesh, OperatorKind::Regional, power_values(mesh, 1.0, -0.3));
    CHECK_THROWS_AS(sandwich_verdict(u, Nonlinearity::power(1.0, 1.0), alpha),
                    ValidationError);
    CHECK_THROWS_AS(sandwich_verdict(u, Nonlinearity::zero(), alpha),
                    ValidationError);
    const Nonlinearity custom = Nonlinearity::custom(
        [](double s) { return s * s; }, [](double b) { return 2.0 * b; });
    CHECK_THROWS_AS(sandwich_verdict(u, custom, alpha), ValidationError);
  }
}

TEST_CASE("discrete kernel-bound check on a small interval problem") {
  const GradedMesh mesh = unit_mesh(48);
  const FractionalOrder alpha(0.75);
  const OperatorMatrix op = assemble(mesh, alpha, OperatorKind::Regional);
  const GreenMatrix g = green_matrix(op);
  const GreenBoundReport rep = green_bound_check(g, mesh, alpha);
  CHECK(std::isfinite(rep.ratio));
  CHECK(rep.ratio > 0.0);
  CHECK(rep.nonnegative);
  CHECK(rep.max_entry > 0.0);
  CHECK(rep.min_entry >= -1e-10 * rep.max_entry);

  CHECK_THROWS_AS(green_bound_check(g, unit_mesh(24), alpha), ValidationError);
  CHECK_THROWS_AS(green_bound_check(g, mesh, FractionalOrder(0.5)),
                  ValidationError);
}

TEST_CASE("kernel-bound stability wrapper compares two resolutions") {
  const GreenBoundStability st = green_bound_stability(
      Domain::ball(1.0, 3), FractionalOrder(0.75), OperatorKind::Regional, 24,
      2.0);
  CHECK(std::isfinite(st.coarse.ratio));
  CHECK(std::isfinite(st.fine.ratio));
  CHECK(st.coarse.nonnegative);
  CHECK(st.fine.nonnegative);
  CHECK(st.change ==
        doctest::Approx(std::abs(st.fine.ratio - st.coarse.ratio) /
                        st.coarse.ratio));
}

TEST_CASE("layer diagnostics on synthetic capped profiles") {
  // Manufactured levels obeying u_n = min(n, (1/(2 lambda)) rho^-kappa) with
  // lambda = 1: inside the layer (r_n, 2 r_n] the cap is inactive and the
  // bound is matched exactly.
  const double a = 0.9, p = 2.0;
  const double kappa = (2.0 * a - 1.0) / (p - 1.0);  // 0.8
  const GradedMesh mesh = unit_mesh(1024, 3.0);
  const Nonlinearity f = Nonlinearity::power(1.0, p);

  auto make_result = [&](double center_boost) {
    BlowupResult res;
    for (double n : {64.0, 256.0, 1024.0, 4096.0}) {
      BlowupLevel level;
      level.n = n;
      Eigen::VectorXd v(mesh.size);
      for (int i = 0; i < mesh.size; ++i)
        v(i) = std::min(n, 0.5 * std::pow(mesh.rho(i), -kappa)) +
               center_boost * n;
      level.field = synthetic_field(mesh, OperatorKind::Regional, v);
      res.levels.push_back(std::move(level));
    }
    res.diverged = true;
    return res;
  };

  SUBCASE("bounded interior: constant center, exact layer bound") {
    const NonexistenceReport rep = nonexistence_diagnostics(
        make_result(0.0), f, FractionalOrder(a), LayerConfig{1.0, 1.0, 2.0});
    CHECK(rep.in_regime);  // p = 2 <= 1 + 2a = 2.8 and p = 2 < a/(1-a) = 9
    CHECK(rep.lambda == doctest::Approx(1.0));
    CHECK(rep.layer_exponent_predicted == doctest::Approx(kappa));
    CHECK(std::abs(std::abs(rep.layer_fit.beta) - kappa) <= 0.15);
    CHECK(rep.layer_exponent_ok);
    CHECK(rep.max_bound_deviation <= 1e-9);
    REQUIRE(rep.center_values.size() == 4);
    CHECK_FALSE(rep.center_strictly_increasing);
    CHECK(rep.top_ratio == doctest::Approx(1.0));
  }
  SUBCASE("growing center is flagged") {
    const NonexistenceReport rep = nonexistence_diagnostics(
        make_result(1e-3), f, FractionalOrder(a), LayerConfig{1.0, 1.0, 2.0});
    CHECK(rep.center_strictly_increasing);
    CHECK(rep.top_ratio > 2.0);
    CHECK(rep.max_bound_deviation <= 0.05);
    CHECK(rep.layer_exponent_ok);
  }
  SUBCASE("layer constant is fitted when not configured") {
    const NonexistenceReport rep = nonexistence_diagnostics(
        make_result(0.0), f, FractionalOrder(a), LayerConfig{});
    CHECK(rep.lambda > 0.0);
    CHECK(std::isfinite(rep.lambda));
    CHECK(std::abs(std::abs(rep.layer_fit.beta) - kappa) <= 0.15);
  }
}

TEST_CASE("regime classification across orders and powers") {
  const GradedMesh mesh = unit_mesh(16, 2.0);
  auto one_level = [&](double n) {
    BlowupResult res;
    BlowupLevel level;
    level.n = n;
    level.field = synthetic_field(mesh, OperatorKind::Regional,
                                  Eigen::VectorXd::Ones(mesh.size));
    res.levels.push_back(std::move(level));
    return res;
  };
  struct Case {
    double a, p;
    bool expect;
  };
  for (const Case c : {Case{0.9, 2.0, true}, Case{0.75, 2.0, true},
                       Case{0.75, 4.0, false}, Case{0.6, 2.0, false}}) {
    CAPTURE(c.a);
    CAPTURE(c.p);
    const NonexistenceReport rep = nonexistence_diagnostics(
        one_level(1.0), Nonlinearity::power(1.0, c.p), FractionalOrder(c.a));
    CHECK(rep.in_regime == c.expect);
  }
}

TEST_CASE("layer diagnostics input validation") {
  const GradedMesh mesh = unit_mesh(16, 2.0);
  BlowupResult empty;
  CHECK_THROWS_AS(nonexistence_diagnostics(empty, Nonlinearity::power(1.0, 2.0),
                                           FractionalOrder(0.9)),
                  ValidationError);
  BlowupResult one;
  BlowupLevel level;
  level.n = 1.0;
  level.field = synthetic_field(mesh, OperatorKind::Regional,
                                Eigen::VectorXd::Ones(mesh.size));
  one.levels.push_back(std::move(level));
  CHECK_THROWS_AS(nonexistence_diagnostics(one, Nonlinearity::power(1.0, 1.0),
                                           FractionalOrder(0.9)),
                  ValidationError);
  CHECK_THROWS_AS(nonexistence_diagnostics(one, Nonlinearity::zero(),
                                           FractionalOrder(0.9)),
                  ValidationError);
  const Nonlinearity custom = Nonlinearity::custom(
      [](double s) { return s * s; }, [](double b) { return 2.0 * b; });
  CHECK_THROWS_AS(
      nonexistence_diagnostics(one, custom, FractionalOrder(0.9)),
      ValidationError);
}
