#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "rflab/errors.hpp"
#include "rflab/geometry.hpp"

using namespace rflab;

TEST_CASE("fractional order validates its range") {
  CHECK(FractionalOrder(0.75).value == 0.75);
  CHECK(FractionalOrder(0.51).above_half());
  CHECK_FALSE(FractionalOrder(0.5).above_half());
  CHECK_THROWS_AS(FractionalOrder(0.0), ValidationError);
  CHECK_THROWS_AS(FractionalOrder(1.0), ValidationError);
  CHECK_THROWS_AS(FractionalOrder(-0.3), ValidationError);
  CHECK_THROWS_AS(FractionalOrder(1.2), ValidationError);
}

TEST_CASE("domain geometry") {
  const Domain itv = Domain::interval(-1.0, 3.0);
  CHECK(itv.rho(-0.5) == doctest::Approx(0.5));
  CHECK(itv.rho(2.0) == doctest::Approx(1.0));
  CHECK(itv.diameter() == doctest::Approx(4.0));
  CHECK(itv.inradius() == doctest::Approx(2.0));

  const Domain ball = Domain::ball(2.0, 3);
  CHECK(ball.rho(0.5) == doctest::Approx(1.5));
  CHECK(ball.diameter() == doctest::Approx(4.0));
  CHECK(ball.inradius() == doctest::Approx(2.0));
}

TEST_CASE("graded interval mesh structure") {
  const Domain dom = Domain::interval(-1.0, 1.0);
  const GradedMesh mesh = build_mesh(dom, 65, 3.0);
  REQUIRE(mesh.size == 65);
  REQUIRE(mesh.boundary_nodes.size() == 2);
  CHECK(mesh.boundary_nodes[0] == doctest::Approx(-1.0));
  CHECK(mesh.boundary_nodes[1] == doctest::Approx(1.0));

  // The extreme node sits at depth half * (2/(M+1))^gamma.
  CHECK(mesh.rho(0) ==
        doctest::Approx(std::pow(2.0 / 66.0, 3.0)).epsilon(1e-12));
  CHECK(mesh.rho(mesh.size - 1) == doctest::Approx(mesh.rho(0)).epsilon(1e-12));

  for (int i = 1; i < mesh.size; ++i) {
    CHECK(mesh.node(i) > mesh.node(i - 1));
  }
  for (int i = 0; i < mesh.size; ++i) {
    CHECK(mesh.rho(i) == doctest::Approx(dom.rho(mesh.node(i))).epsilon(1e-14));
    CHECK(mesh.rho(i) > 0.0);
    CHECK(mesh.cell_weight(i) > 0.0);
  }

  // Cell weights tile the interval up to the two boundary half-cells.
  double wsum = 0.0;
  for (int i = 0; i < mesh.size; ++i) wsum += mesh.cell_weight(i);
  CHECK(wsum > 0.9 * dom.diameter());
  CHECK(wsum <= dom.diameter() + 1e-12);

  CHECK(mesh.h_min() == doctest::Approx(mesh.rho(0)).epsilon(1e-12));
}

TEST_CASE("uniform grading reproduces the uniform mesh") {
  const GradedMesh mesh = build_mesh(Domain::interval(0.0, 1.0), 31, 1.0);
  const double h = 1.0 / 32.0;
  for (int i = 0; i < mesh.size; ++i) {
    CHECK(mesh.node(i) == doctest::Approx((i + 1) * h).epsilon(1e-12));
  }
}

TEST_CASE("interior window selects exactly the deep nodes") {
  const GradedMesh mesh = build_mesh(Domain::interval(-1.0, 1.0), 48, 2.0);
  const auto [lo, hi] = mesh.interior_window(0.2);
  REQUIRE(lo <= hi);
  for (int i = 0; i < mesh.size; ++i) {
    if (i >= lo && i <= hi) {
      CHECK(mesh.rho(i) > 0.2);
    } else {
      CHECK(mesh.rho(i) <= 0.2);
    }
  }
  const auto empty = mesh.interior_window(10.0);
  CHECK(empty.first > empty.second);
}

TEST_CASE("ball meshes are radial with a single trace node") {
  const GradedMesh mesh = build_mesh(Domain::ball(1.0, 3), 40, 3.0);
  REQUIRE(mesh.boundary_nodes.size() == 1);
  CHECK(mesh.boundary_nodes[0] == doctest::Approx(1.0));
  for (int i = 0; i < mesh.size; ++i) {
    CHECK(mesh.node(i) >= 0.0);
    CHECK(mesh.node(i) < 1.0);
    CHECK(mesh.rho(i) == doctest::Approx(1.0 - mesh.node(i)).epsilon(1e-14));
  }
}

TEST_CASE("interval exterior mass matches the closed form") {
  const Domain dom = Domain::interval(-1.0, 1.0);
  for (double a : {0.6, 0.75, 0.9}) {
    const FractionalOrder alpha(a);
    for (double x : {-0.7, 0.0, 0.4, 0.93}) {
      CHECK(phi(dom, alpha, x) ==
            doctest::Approx(oracle::phi_interval(-1.0, 1.0, a, x))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("ball exterior mass in R^3 against the independent double integral") {
  const Domain dom = Domain::ball(1.0, 3);
  for (double a : {0.75, 0.9}) {
    const FractionalOrder alpha(a);
    for (double r : {0.0, 0.3, 0.6, 0.8}) {
      CAPTURE(a);
      CAPTURE(r);
      const double lib = phi(dom, alpha, r);
      const double orc = oracle::phi_ball3(1.0, a, r, 1e-7);
      CHECK(lib == doctest::Approx(orc).epsilon(1e-5));
    }
  }
}

TEST_CASE("one-dimensional balls reduce to the symmetric interval") {
  const Domain ball = Domain::ball(1.0, 1);
  const FractionalOrder alpha(0.75);
  for (double r : {0.0, 0.35, 0.8}) {
    CHECK(phi(ball, alpha, r) ==
          doctest::Approx(oracle::phi_interval(-1.0, 1.0, 0.75, r))
              .epsilon(1e-10));
  }
}

TEST_CASE("radial kernel closed forms") {
  const FractionalOrder alpha(0.7);
  const double q = 1.0 + 2.0 * 0.7;

  // N = 1: two mirror contributions.
  CHECK(radial_kernel(1, alpha, 0.4, 0.9) ==
        doctest::Approx(std::pow(0.5, -q) + std::pow(1.3, -q)).epsilon(1e-13));

  // N = 3 closed form against the generic polar quadrature path.
  for (double s : {0.2, 0.55, 0.95}) {
    CHECK(radial_kernel(3, alpha, 0.6, s) ==
          doctest::Approx(radial_kernel_quadrature(3, alpha, 0.6, s))
              .epsilon(1e-9));
  }
}

TEST_CASE("planar kernel against an independent angular integral") {
  const double a = 0.7;
  const FractionalOrder alpha(a);
  const double r = 0.5, s = 0.8;
  // K_2(r, s) = s Int_0^{2 pi} (r^2 + s^2 - 2 r s cos t)^{-(1+a)} dt
  const double angular = oracle::simpson(
      [&](double t) {
        const double d2 = r * r + s * s - 2.0 * r * s * std::cos(t);
        return std::pow(d2, -(1.0 + a));
      },
      0.0, 2.0 * M_PI, 1e-12);
  CHECK(radial_kernel(2, alpha, r, s) ==
        doctest::Approx(s * angular).epsilon(1e-8));
}

TEST_CASE("offset-parameterized kernel agrees with the direct evaluation") {
  const FractionalOrder alpha(0.8);
  for (int dim : {1, 3}) {
    for (int side : {-1, +1}) {
      const double r = 0.6, t = 1e-3;
      CHECK(kernel_offset(dim, alpha, r, t, side) ==
            doctest::Approx(radial_kernel(dim, alpha, r, r + side * t))
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("offset kernel keeps tiny coincidence distances exact") {
  const FractionalOrder alpha(0.8);
  const double q = 1.0 + 2.0 * 0.8;
  const double r = 0.6, t = 1e-12 * r;
  // N = 1: t^{-q} + (2r + t)^{-q}, which direct subtraction cannot deliver.
  CHECK(kernel_offset(1, alpha, r, t, +1) ==
        doctest::Approx(std::pow(t, -q) + std::pow(2.0 * r + t, -q))
            .epsilon(1e-12));
}

TEST_CASE("sphere measures") {
  CHECK(sphere_measure(0) == doctest::Approx(2.0));
  CHECK(sphere_measure(1) == doctest::Approx(2.0 * M_PI));
  CHECK(sphere_measure(2) == doctest::Approx(4.0 * M_PI));
}
