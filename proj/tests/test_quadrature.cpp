#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rflab/quadrature.hpp"

using namespace rflab;

TEST_CASE("kernel moments match their defining integrals") {
  for (double a : {0.3, 0.5, 0.75, 0.9}) {
    CAPTURE(a);
    const KernelMoments km(a);
    const double q = 1.0 + 2.0 * a;

    const double m0_num = adaptive_integrate(
        [&](double t) { return std::pow(t, -q); }, 0.2, 1.7, 0.0, 1e-13);
    CHECK(km.m0(0.2, 1.7) == doctest::Approx(m0_num).epsilon(1e-11));

    const double m1_num = adaptive_integrate(
        [&](double t) { return std::pow(t, -q + 1.0); }, 0.2, 1.7, 0.0, 1e-13);
    CHECK(km.m1(0.2, 1.7) == doctest::Approx(m1_num).epsilon(1e-11));

    // m2 runs from zero through the integrable singularity.
    const double expo = 2.0 - 2.0 * a;
    CHECK(km.m2_from_zero(0.8) ==
          doctest::Approx(std::pow(0.8, expo) / expo).epsilon(1e-13));
  }
}

TEST_CASE("the log branch of m1 at alpha = 1/2") {
  const KernelMoments km(0.5);
  CHECK(km.m1(0.3, 2.4) == doctest::Approx(std::log(2.4 / 0.3)).epsilon(1e-13));
}

TEST_CASE("gauss-legendre nodes and weights") {
  const GaussRule& rule = gauss_legendre(12);
  REQUIRE(rule.nodes.size() == 12);

  double wsum = 0.0;
  for (double w : rule.weights) wsum += w;
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));

  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    CHECK(rule.nodes[i] ==
          doctest::Approx(-rule.nodes[rule.nodes.size() - 1 - i])
              .epsilon(1e-13));
  }

  // Order-n Gauss is exact through degree 2n - 1.
  for (int k = 0; k <= 23; ++k) {
    double val = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      val += rule.weights[i] * std::pow(rule.nodes[i], k);
    }
    const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
    CHECK(val == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("gauss panel on a shifted interval") {
  const double got =
      gauss_panel([](double x) { return std::cos(x); }, 0.0, 1.0);
  CHECK(got == doctest::Approx(std::sin(1.0)).epsilon(1e-14));
}

TEST_CASE("adaptive integration of smooth integrands") {
  const double got = adaptive_integrate(
      [](double x) { return std::exp(x); }, 0.0, 2.0, 0.0, 1e-12);
  CHECK(got == doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-11));
}

TEST_CASE("adaptive integration through integrable endpoint singularities") {
  const double got = adaptive_integrate(
      [](double t) { return std::pow(t, -0.4); }, 0.0, 1.0, 0.0, 1e-11);
  CHECK(got == doctest::Approx(1.0 / 0.6).epsilon(1e-9));

  const double lg = adaptive_integrate(
      [](double t) { return std::log(t); }, 0.0, 1.0, 0.0, 1e-11);
  CHECK(lg == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("absolute tolerance is honored on scaled integrands") {
  const double scale = 3.7e6;
  const double got = adaptive_integrate(
      [=](double x) { return scale * std::sin(x); }, 0.0, M_PI, 1e-4, 0.0);
  CHECK(std::abs(got - 2.0 * scale) <= 1e-3);
}

TEST_CASE("geometric tails of algebraically decaying integrands") {
  const double got = geometric_tail_integrate(
      [](double t) { return std::pow(t, -2.5); }, 1.0, 0.0, 1e-12);
  CHECK(got == doctest::Approx(1.0 / 1.5).epsilon(1e-10));

  const double slow = geometric_tail_integrate(
      [](double t) { return std::pow(t, -1.2); }, 2.0, 0.0, 1e-10);
  CHECK(slow == doctest::Approx(std::pow(2.0, -0.2) / 0.2).epsilon(1e-8));
}
