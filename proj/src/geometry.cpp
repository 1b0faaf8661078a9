#include "rflab/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "rflab/errors.hpp"
#include "rflab/quadrature.hpp"

namespace rflab {

FractionalOrder::FractionalOrder(double a) : value(a) {
  if (!(a > 0.0) || !(a < 1.0))
    throw ValidationError("FractionalOrder: alpha must lie in (0,1), got " +
                          std::to_string(a));
}

Domain Domain::interval(double a, double b) {
  if (!(a < b)) throw ValidationError("Domain::interval requires a < b");
  Domain d;
  d.kind = DomainKind::Interval;
  d.a = a;
  d.b = b;
  d.dim = 1;
  return d;
}

Domain Domain::ball(double radius, int dim) {
  if (!(radius > 0.0)) throw ValidationError("Domain::ball requires radius > 0");
  if (dim < 1) throw ValidationError("Domain::ball requires dim >= 1");
  Domain d;
  d.kind = DomainKind::Ball;
  d.radius = radius;
  d.dim = dim;
  return d;
}

double Domain::rho(double x) const {
  if (kind == DomainKind::Interval) return std::min(x - a, b - x);
  return radius - std::abs(x);
}

double Domain::rho_point(std::span<const double> x) const {
  if (kind == DomainKind::Interval) {
    if (x.size() != 1)
      throw ValidationError("rho_point: interval expects a 1D point");
    return rho(x[0]);
  }
  if (static_cast<int>(x.size()) != dim)
    throw ValidationError("rho_point: point dimension does not match domain");
  double n2 = 0.0;
  for (double c : x) n2 += c * c;
  return radius - std::sqrt(n2);
}

double Domain::diameter() const {
  return kind == DomainKind::Interval ? b - a : 2.0 * radius;
}

double Domain::inradius() const {
  return kind == DomainKind::Interval ? 0.5 * (b - a) : radius;
}

double GradedMesh::h_min() const {
  const std::size_t m = nodes.size();
  double h = 0.0;
  if (domain.kind == DomainKind::Interval) {
    h = std::min(nodes[0] - domain.a, domain.b - nodes[m - 1]);
  } else {
    h = std::min(nodes[0], domain.radius - nodes[m - 1]);
  }
  for (std::size_t i = 0; i + 1 < m; ++i) h = std::min(h, nodes[i + 1] - nodes[i]);
  return h;
}

double GradedMesh::cell_weight(int i) const {
  const int m = size;
  double prev, next;
  if (domain.kind == DomainKind::Interval) {
    prev = (i == 0) ? domain.a : node(i - 1);
    next = (i == m - 1) ? domain.b : node(i + 1);
  } else {
    prev = (i == 0) ? 0.0 : node(i - 1);
    next = (i == m - 1) ? domain.radius : node(i + 1);
  }
  return 0.5 * (next - prev);
}

std::pair<int, int> GradedMesh::interior_window(double t) const {
  int lo = size, hi = -1;
  for (int i = 0; i < size; ++i) {
    if (rho(i) > t) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  return {lo, hi};
}

GradedMesh build_mesh(const Domain& domain, int m, double gamma) {
  if (m < 3) throw ValidationError("build_mesh: need at least 3 interior nodes");
  if (m > 1 << 14) throw ValidationError("build_mesh: M too large for dense storage");
  if (!(gamma >= 1.0)) throw ValidationError("build_mesh: gamma must be >= 1");

  GradedMesh mesh;
  mesh.domain = domain;
  mesh.size = m;
  mesh.gamma = gamma;
  mesh.nodes.resize(static_cast<std::size_t>(m));

  if (domain.kind == DomainKind::Interval) {
    // mid +- half * (1 - (1 - |2t-1|)^gamma): clusters both endpoints, keeps
    // the mesh symmetric about the midpoint, uniform at gamma = 1.
    const double mid = 0.5 * (domain.a + domain.b);
    const double half = 0.5 * (domain.b - domain.a);
    for (int j = 1; j <= m; ++j) {
      const double t = static_cast<double>(j) / (m + 1);
      const double u = 2.0 * t - 1.0;
      const double mag = 1.0 - std::pow(1.0 - std::abs(u), gamma);
      mesh.nodes[static_cast<std::size_t>(j - 1)] =
          mid + (u < 0.0 ? -half * mag : half * mag);
    }
    mesh.boundary_nodes = {domain.a, domain.b};
  } else {
    // Radii clustered toward the sphere r = R only.
    for (int j = 1; j <= m; ++j) {
      const double t = static_cast<double>(j) / (m + 1);
      mesh.nodes[static_cast<std::size_t>(j - 1)] =
          domain.radius * (1.0 - std::pow(1.0 - t, gamma));
    }
    mesh.boundary_nodes = {domain.radius};
  }

  mesh.rho_nodes.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    mesh.rho_nodes[static_cast<std::size_t>(i)] = domain.rho(mesh.nodes[static_cast<std::size_t>(i)]);
  return mesh;
}

double sphere_measure(int k) {
  // |S^k| = 2 pi^{(k+1)/2} / Gamma((k+1)/2)
  return 2.0 * std::pow(M_PI, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

double kernel_offset(int dim, FractionalOrder alpha, double r, double t,
                     int side) {
  const double q = 1.0 + 2.0 * alpha.value;
  const double s = r + side * t;
  if (dim == 1) return std::pow(t, -q) + std::pow(r + s, -q);
  if (dim == 3)
    return (2.0 * M_PI * s / (q * r)) *
           (std::pow(t, -q) - std::pow(r + s, -q));
  if (dim == 2) {
    const double p = 1.0 + alpha.value;
    const double d2 = t * t;
    const double rs2 = 2.0 * r * s;
    auto integrand = [&](double theta) {
      return std::pow(d2 + rs2 * (1.0 - std::cos(theta)), -p);
    };
    const double peak = std::pow(d2, -p);
    return 2.0 * s *
           adaptive_integrate(integrand, 0.0, M_PI, 1e-14 * peak, 1e-12, 64);
  }
  return radial_kernel(dim, alpha, r, s);
}

double radial_kernel_quadrature(int dim, FractionalOrder alpha, double r,
                                double s) {
  if (dim < 2)
    throw ValidationError("radial_kernel_quadrature requires dim >= 2");
  const double p = 0.5 * (dim + 2.0 * alpha.value);
  const double d2 = (r - s) * (r - s);
  const double rs2 = 2.0 * r * s;
  auto integrand = [&](double theta) {
    const double q = d2 + rs2 * (1.0 - std::cos(theta));
    double w = std::pow(q, -p);
    if (dim > 2) w *= std::pow(std::sin(theta), dim - 2);
    return w;
  };
  const double peak = std::pow(d2, -p);
  const double tail =
      sphere_measure(dim - 2) *
      adaptive_integrate(integrand, 0.0, M_PI, 1e-14 * peak, 1e-12, 64);
  return std::pow(s, dim - 1) * tail;
}

double radial_kernel(int dim, FractionalOrder alpha, double r, double s) {
  const double q = 1.0 + 2.0 * alpha.value;
  if (dim == 1) return std::pow(std::abs(r - s), -q) + std::pow(r + s, -q);
  if (dim == 3) {
    // Closed form of the polar integral in three dimensions.
    if (r < 1e-12 * s) return 4.0 * M_PI * std::pow(s, -q);
    const double inner =
        std::pow(std::abs(r - s), -q) - std::pow(r + s, -q);
    return s * s * (2.0 * M_PI / (q * r * s)) * inner;
  }
  return radial_kernel_quadrature(dim, alpha, r, s);
}

double phi(const Domain& domain, FractionalOrder alpha, double x) {
  const double two_alpha = 2.0 * alpha.value;
  if (domain.kind == DomainKind::Interval) {
    if (!(x > domain.a) || !(x < domain.b))
      throw ValidationError("phi: point must lie inside the interval");
    return (std::pow(x - domain.a, -two_alpha) +
            std::pow(domain.b - x, -two_alpha)) /
           two_alpha;
  }
  const double r = std::abs(x);
  if (!(r < domain.radius)) throw ValidationError("phi: point must lie inside the ball");
  const double scale = std::pow(domain.radius - r, -two_alpha) / two_alpha;
  auto f = [&](double s) { return radial_kernel(domain.dim, alpha, r, s); };
  return geometric_tail_integrate(f, domain.radius, 1e-11 * scale, 1e-11);
}

}  // namespace rflab
