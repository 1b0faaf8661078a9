#pragma once

#include <span>
#include <utility>
#include <vector>

namespace rflab {

/// Fractional order a in (0, 1) of the operator (-Delta)^a.  Constructing an
/// out-of-range value throws; blow-up drivers additionally require a > 1/2.
struct FractionalOrder {
  explicit FractionalOrder(double a);
  double value = 0.5;
  bool above_half() const { return value > 0.5; }
};

enum class DomainKind { Interval, Ball };

/// Interval (a, b) or the radial reduction of the ball B_R in dimension N.
/// Ball coordinates are radii r in [0, R); interval coordinates are points x.
struct Domain {
  static Domain interval(double a, double b);
  static Domain ball(double radius, int dim);

  /// Distance to the boundary from coordinate x (interval: min(x-a, b-x);
  /// ball: R - r).
  double rho(double x) const;
  /// Distance to the boundary from an N-dimensional point (ball only).
  double rho_point(std::span<const double> x) const;

  double diameter() const;
  double inradius() const;

  DomainKind kind = DomainKind::Interval;
  double a = -1.0, b = 1.0;  // interval endpoints
  double radius = 1.0;       // ball radius
  int dim = 1;               // ambient dimension N
};

/// Boundary-clustered collocation mesh.  Interior nodes are strictly inside
/// the domain; boundary nodes carry the Dirichlet trace.  The grading map
/// places interval nodes at  mid +- (b-a)/2 * (1 - (1 - |2t-1|))^... ; see
/// build_mesh.  gamma = 1 reproduces the uniform mesh; larger gamma clusters
/// nodes so the extreme node sits at distance ~ ((b-a)/2) (2/(M+1))^gamma.
struct GradedMesh {
  Domain domain;
  int size = 0;        // number of interior nodes M
  double gamma = 3.0;  // grading strength

  std::vector<double> nodes;           // interior coordinates, ascending
  std::vector<double> boundary_nodes;  // trace locations ({a,b} or {R})
  std::vector<double> rho_nodes;       // distance to boundary per node

  double node(int i) const { return nodes[static_cast<std::size_t>(i)]; }
  double rho(int i) const { return rho_nodes[static_cast<std::size_t>(i)]; }
  /// Smallest cell width (equals the extreme node's boundary distance for
  /// graded interval meshes).
  double h_min() const;
  /// Trapezoid cell weight of node i (half the span of its two neighbours,
  /// boundary nodes included).
  double cell_weight(int i) const;
  /// Inner region {rho > t} as a contiguous index window [lo, hi]; empty
  /// window is returned as lo > hi.
  std::pair<int, int> interior_window(double t) const;
};

/// Builds the deterministic graded mesh (M interior nodes, grading gamma >= 1).
GradedMesh build_mesh(const Domain& domain, int m, double gamma);

/// Exterior mass  phi(x) = Int_{R^N \ Omega} |x-y|^{-(N+2a)} dy  at the point
/// with coordinate x (interval) or radius x (ball).  Closed form on intervals;
/// radial-kernel tail quadrature on balls.
double phi(const Domain& domain, FractionalOrder alpha, double x);

/// Angular collapse of the kernel onto radii:
///   K_N(r, s) = s^{N-1} Int_{S^{N-1}} |r e1 - s w|^{-(N+2a)} dsigma(w),
/// so that for radial u:  Int_{B_R} (u(r)-u(y)) |x-y|^{-(N+2a)} dy
///                      = Int_0^R (u(r)-u(s)) K_N(r,s) ds.
/// N = 1 reduces to |r-s|^{-(1+2a)} + (r+s)^{-(1+2a)}; N = 3 has a closed
/// form; other N use polar-angle Gauss quadrature (order 64) with dyadic
/// refinement toward the aligned direction.
double radial_kernel(int dim, FractionalOrder alpha, double r, double s);

/// radial_kernel(r, r + side*t) with the coincidence distance taken exactly
/// as t.  Offset-parameterized quadrature must use this form: recovering the
/// distance from r and r±t by subtraction loses the offset to rounding once
/// t falls below ~1e-8·r, and the noise blocks tolerance-driven refinement.
double kernel_offset(int dim, FractionalOrder alpha, double r, double t,
                     int side);

/// Surface measure of the unit k-sphere S^k living in R^{k+1}.
double sphere_measure(int k);

/// Quadrature path of radial_kernel, exposed for cross-checking the closed
/// forms (valid for dim >= 2).
double radial_kernel_quadrature(int dim, FractionalOrder alpha, double r,
                                double s);

}  // namespace rflab
