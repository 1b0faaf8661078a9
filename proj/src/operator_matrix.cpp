#include "rflab/operator_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "rflab/errors.hpp"
#include "rflab/parallel.hpp"
#include "rflab/quadrature.hpp"

namespace rflab {
namespace {

// Global node layout used by both domain kinds:
//   interval: P[0] = a, P[1..M] interior, P[M+1] = b, trace columns {0, 1};
//   ball:     P[0] = 0 (center, not a node), P[1..M] radii, P[M+1] = R,
//             single trace column.
std::vector<double> global_points(const GradedMesh& mesh) {
  std::vector<double> p;
  p.reserve(mesh.nodes.size() + 2);
  p.push_back(mesh.domain.kind == DomainKind::Interval ? mesh.domain.a : 0.0);
  p.insert(p.end(), mesh.nodes.begin(), mesh.nodes.end());
  p.push_back(mesh.domain.kind == DomainKind::Interval ? mesh.domain.b
                                                       : mesh.domain.radius);
  return p;
}

// ------------------------------------------------------------------ interval

// Width of the symmetric near window in neighbor spacings.  The 3-point
// quadratic window carries the principal value; cells beyond it use linear
// interpolation whose consistency defect scales like h^2 W^{-2a}, so pushing
// the window out a few cells buys the accuracy back without giving up the
// sign structure (window and cell weights all stay nonpositive off the
// diagonal).  Much wider windows lose again: the local quadratic is only
// trusted on a few spacings.
constexpr double kWindowWidths = 4.0;

// One collocation row of the interval operator.  Every coupling is paired
// against the diagonal as it is added, so regional rows annihilate constants
// to the last bit of the accumulation order.
void interval_row(const std::vector<double>& P, const KernelMoments& km,
                  Eigen::MatrixXd& A, Eigen::MatrixXd& B, int i) {
  const int M = static_cast<int>(P.size()) - 2;
  const int g = i + 1;
  const double x = P[g];
  double diag = 0.0;
  auto add = [&](int p, double w) {
    diag -= w;
    if (p == 0)
      B(i, 0) += w;
    else if (p == M + 1)
      B(i, 1) += w;
    else
      A(i, p - 1) += w;
  };

  const double hm = x - P[g - 1];
  const double hp = P[g + 1] - x;
  const double W = std::min(
      {x - P[0], P[M + 1] - x, kWindowWidths * std::max(hm, hp)});

  // Symmetric near window (x - W, x + W): u_h is the quadratic through the
  // three local nodes, u_h(x+t) + u_h(x-t) = 2 u(x) + 2 c t^2, so the odd
  // part cancels in the principal value and
  //   Int_{-W}^{W} (u(x) - u_h) |t|^{-1-2a} dt = -2 c m2(W),
  // with c = [(uR - uC) h- + (uL - uC) h+] / (h- h+ (h- + h+)).
  const double D = hm * hp * (hm + hp);
  const double M2s = 2.0 * km.m2_from_zero(W);
  add(g - 1, -(hp / D) * M2s);
  add(g + 1, -(hm / D) * M2s);

  // Cells (or slivers of cells) outside the window: exact kernel moments
  // against the linear interpolant.  On a stretch at distances [s1, t0] of a
  // cell spanning [t1, t0] the endpoint at t1 carries weight (t0 I0 - I1)/w
  // and the one at t0 carries (I1 - t1 I0)/w, both nonnegative; a stretch of
  // the cell adjacent to the node lays its near weight harmlessly onto the
  // diagonal.
  for (int j = g; j <= M; ++j) {  // right side
    const double t1 = P[j] - x;
    const double t0 = P[j + 1] - x;
    if (t0 <= W) continue;
    const double w = t0 - t1;
    const double I0 = km.m0(std::max(t1, W), t0);
    const double I1 = km.m1(std::max(t1, W), t0);
    add(j, -(t0 * I0 - I1) / w);
    add(j + 1, -(I1 - t1 * I0) / w);
  }
  for (int j = g - 1; j >= 0; --j) {  // left side
    const double t1 = x - P[j + 1];
    const double t0 = x - P[j];
    if (t0 <= W) continue;
    const double w = t0 - t1;
    const double I0 = km.m0(std::max(t1, W), t0);
    const double I1 = km.m1(std::max(t1, W), t0);
    add(j + 1, -(t0 * I0 - I1) / w);
    add(j, -(I1 - t1 * I0) / w);
  }

  A(i, i) += diag;
}

// ---------------------------------------------------------------------- ball

// One collocation row of the radial ball operator at r = P[g].  The radial
// profile is extended evenly through the origin: the center cell [0, r_1]
// carries the constant u_1, and the quadratic of row 1 uses the mirror node
// at -r_1 with value u_1 (column index <= 0 folds onto column 0).
void ball_row(const std::vector<double>& P, int dim, FractionalOrder alpha,
              const KernelMoments& km, Eigen::MatrixXd& A, Eigen::MatrixXd& B,
              int i) {
  const int M = static_cast<int>(P.size()) - 2;
  const int g = i + 1;
  const double r = P[g];
  double diag = 0.0;
  auto add = [&](int p, double w) {
    diag -= w;
    if (p == M + 1)
      B(i, 0) += w;
    else
      A(i, std::max(p, 1) - 1) += w;
  };
  auto kernel = [&](double s) { return radial_kernel(dim, alpha, r, s); };
  auto cell_int = [&](const std::function<double(double)>& f, double c,
                      double d) { return adaptive_integrate(f, c, d, 0.0, 1e-11); };

  const double hm = (g == 1) ? 2.0 * P[1] : r - P[g - 1];
  const double hp = P[g + 1] - r;
  // The near window must stay inside (0, R); for row 1 that caps it at r_1.
  const double m = (g == 1) ? std::min(P[1], hp) : std::min(hm, hp);

  // Near window with the local kernel strength frozen at the half–window
  // points: K_N(r, r +- t) = strength(t) t^{-1-2a} with smooth strength.
  const double c_loc =
      0.5 * std::pow(0.5 * m, 1.0 + km.two_alpha) *
      (kernel_offset(dim, alpha, r, 0.5 * m, -1) +
       kernel_offset(dim, alpha, r, 0.5 * m, +1));
  const double D = hm * hp * (hm + hp);
  const double M2s = 2.0 * km.m2_from_zero(m) * c_loc;
  add(g - 1, -(hp / D) * M2s);
  add(g + 1, -(hm / D) * M2s);

  // Slivers of the adjacent cells outside the window, integrated against the
  // true radial kernel (they are not small on graded meshes).  Row 1's left
  // sliver [0, r_1 - m] lies in the constant center cell and contributes
  // nothing.
  if (hp > m) {
    add(g + 1, -cell_int(
                   [&](double s) {
                     return (s / hp) * kernel_offset(dim, alpha, r, s, +1);
                   },
                   m, hp));
  }
  if (g > 1 && hm > m) {
    add(g - 1, -cell_int(
                   [&](double s) {
                     return (s / hm) * kernel_offset(dim, alpha, r, s, -1);
                   },
                   m, hm));
  }

  // Far cells k = [P[k], P[k+1]], skipping the two adjacent to the node.
  for (int k = 0; k <= M; ++k) {
    if (k == g - 1 || k == g) continue;
    const double c = P[k];
    const double d = P[k + 1];
    if (k == 0) {
      add(1, -cell_int(kernel, c, d));  // constant u_1 on the center cell
      continue;
    }
    const double w = d - c;
    add(k, -cell_int([&](double s) { return ((d - s) / w) * kernel(s); }, c, d));
    add(k + 1, -cell_int([&](double s) { return ((s - c) / w) * kernel(s); }, c, d));
  }

  A(i, i) += diag;
}

// ------------------------------------------------------- shared scaffolding

OperatorMatrix make_empty(const GradedMesh& mesh, FractionalOrder alpha,
                          OperatorKind kind) {
  if (mesh.size < 2)
    throw ValidationError("operator assembly needs at least 2 interior nodes");
  OperatorMatrix op;
  op.kind = kind;
  op.alpha = alpha;
  op.mesh = mesh;
  const int M = mesh.size;
  const int nb = static_cast<int>(mesh.boundary_nodes.size());
  op.interior = Eigen::MatrixXd::Zero(M, M);
  op.boundary = Eigen::MatrixXd::Zero(M, nb);
  op.phi_nodes = Eigen::VectorXd::Zero(M);
  return op;
}

}  // namespace

OperatorMatrix assemble(const GradedMesh& mesh, FractionalOrder alpha,
                        OperatorKind kind) {
  OperatorMatrix op = make_empty(mesh, alpha, kind);
  const std::vector<double> P = global_points(mesh);
  const KernelMoments km(alpha.value);
  const int M = mesh.size;

  parallel_for(M, [&](int i) {
    if (mesh.domain.kind == DomainKind::Interval)
      interval_row(P, km, op.interior, op.boundary, i);
    else
      ball_row(P, mesh.domain.dim, alpha, km, op.interior, op.boundary, i);
    op.phi_nodes(i) = phi(mesh.domain, alpha, mesh.node(i));
  });

  if (kind == OperatorKind::Full)
    op.interior.diagonal() += op.phi_nodes;
  return op;
}

// --------------------------------------------------------------- reference
//
// Serial re-derivation of the same scheme, written against the raw
// antiderivatives instead of the shared row helpers.  Used to pin down the
// parallel path in tests and as the baseline of the assembly benchmark.

OperatorMatrix assemble_reference(const GradedMesh& mesh, FractionalOrder alpha,
                                  OperatorKind kind) {
  OperatorMatrix op = make_empty(mesh, alpha, kind);
  const std::vector<double> P = global_points(mesh);
  const int M = mesh.size;
  const double ta = 2.0 * alpha.value;

  // Int_{t0}^{t1} t^p dt with the log branch.
  auto powint = [](double t0, double t1, double p) {
    if (std::abs(p + 1.0) < 1e-12) return std::log(t1 / t0);
    return (std::pow(t1, p + 1.0) - std::pow(t0, p + 1.0)) / (p + 1.0);
  };

  for (int i = 0; i < M; ++i) {
    const int g = i + 1;
    const double x = P[g];
    const bool ball = mesh.domain.kind == DomainKind::Ball;
    auto scatter = [&](int p, double w) {
      if (ball) {
        if (p == M + 1)
          op.boundary(i, 0) += w;
        else
          op.interior(i, std::max(p, 1) - 1) += w;
      } else {
        if (p == 0)
          op.boundary(i, 0) += w;
        else if (p == M + 1)
          op.boundary(i, 1) += w;
        else
          op.interior(i, p - 1) += w;
      }
    };
    auto kern = [&](double s) {
      return radial_kernel(mesh.domain.dim, alpha, x, s);
    };
    // Fixed dyadic-composite quadrature over a cell, refined toward the end
    // nearer the collocation radius (independent of the adaptive engine).
    auto cellq = [&](const std::function<double(double)>& f, double c, double d) {
      const bool refine_left = std::abs(c - x) < std::abs(d - x);
      double total = 0.0, lo = c, hi = d;
      for (int lev = 0; lev < 40; ++lev) {
        const double wdt = hi - lo;
        if (wdt <= 0.0) break;
        if (lev == 39 || wdt < 1e-14 * (d - c)) {
          total += gauss_panel(f, lo, hi, 24);
          break;
        }
        if (refine_left) {
          total += gauss_panel(f, lo + 0.5 * wdt, hi, 24);
          hi = lo + 0.5 * wdt;
        } else {
          total += gauss_panel(f, lo, lo + 0.5 * wdt, 24);
          lo = lo + 0.5 * wdt;
        }
      }
      return total;
    };

    double diag = 0.0;
    if (ball) {
      const double hm = (g == 1) ? 2.0 * P[1] : x - P[g - 1];
      const double hp = P[g + 1] - x;
      const double m = (g == 1) ? std::min(P[1], hp) : std::min(hm, hp);
      const double D = hm * hp * (hm + hp);
      const double strength = 0.5 * (kern(x - 0.5 * m) + kern(x + 0.5 * m)) *
                              std::pow(0.5 * m, 1.0 + ta);
      const double m2 = powint(0.0, m, 1.0 - ta) * strength;
      scatter(g - 1, -2.0 * m2 * hp / D);
      scatter(g + 1, -2.0 * m2 * hm / D);
      diag += 2.0 * m2 * (hm + hp) / D;

      if (hp > m) {
        const double t =
            cellq([&](double s) { return (s / hp) * kern(x + s); }, m, hp);
        scatter(g + 1, -t);
        diag += t;
      }
      if (hm > m && g != 1) {
        const double t =
            cellq([&](double s) { return (s / hm) * kern(x - s); }, m, hm);
        scatter(g - 1, -t);
        diag += t;
      }

      for (int k = 0; k <= M; ++k) {
        if (k == g - 1 || k == g) continue;
        const double c = P[k];
        const double d = P[k + 1];
        const double w = d - c;
        if (k == 0) {
          const double c0 = cellq(kern, c, d);
          scatter(1, -c0);
          diag += c0;
          continue;
        }
        const double wl = cellq([&](double s) { return ((d - s) / w) * kern(s); }, c, d);
        const double wr = cellq([&](double s) { return ((s - c) / w) * kern(s); }, c, d);
        scatter(k, -wl);
        scatter(k + 1, -wr);
        diag += wl + wr;
      }
    } else {
      const double hm = x - P[g - 1];
      const double hp = P[g + 1] - x;
      const double W =
          std::min({x - P[0], P[M + 1] - x, 4.0 * std::max(hm, hp)});
      const double D = hm * hp * (hm + hp);
      const double m2 = powint(0.0, W, 1.0 - ta);
      scatter(g - 1, -2.0 * m2 * hp / D);
      scatter(g + 1, -2.0 * m2 * hm / D);
      diag += 2.0 * m2 * (hm + hp) / D;

      // Stretches of cells outside the symmetric window; a stretch of a cell
      // adjacent to the node puts its near weight onto the diagonal, where
      // the matching diag term cancels it.
      for (int k = 0; k <= M; ++k) {
        const double c = P[k];
        const double d = P[k + 1];
        const double w = d - c;
        const double t1 = d <= x ? x - d : (c >= x ? c - x : 0.0);
        const double t0 = d <= x ? x - c : d - x;
        if (t0 <= W) continue;
        const double I0 = powint(std::max(t1, W), t0, -1.0 - ta);
        const double I1 = powint(std::max(t1, W), t0, -ta);
        const double w_near = (t0 * I0 - I1) / w;
        const double w_far = (I1 - t1 * I0) / w;
        const bool left_of_x = d <= x;
        scatter(left_of_x ? k + 1 : k, -w_near);
        scatter(left_of_x ? k : k + 1, -w_far);
        diag += w_near + w_far;
      }
    }

    op.interior(i, i) += diag;
    op.phi_nodes(i) = phi(mesh.domain, alpha, x);
  }

  if (kind == OperatorKind::Full)
    op.interior.diagonal() += op.phi_nodes;
  return op;
}

Eigen::VectorXd apply(const OperatorMatrix& op, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& trace) {
  if (u.size() != op.interior.rows() || trace.size() != op.boundary.cols())
    throw ValidationError("operator apply: size mismatch");
  return op.interior * u + op.boundary * trace;
}

OracleReport validate_against_oracle(const OperatorMatrix& op,
                                     const std::function<double(double)>& u,
                                     const std::function<double(double)>& expected,
                                     const std::vector<int>& probe_nodes) {
  const GradedMesh& mesh = op.mesh;
  Eigen::VectorXd uv(mesh.size);
  for (int i = 0; i < mesh.size; ++i) uv(i) = u(mesh.node(i));
  Eigen::VectorXd tv(static_cast<Eigen::Index>(mesh.boundary_nodes.size()));
  for (Eigen::Index k = 0; k < tv.size(); ++k)
    tv(k) = u(mesh.boundary_nodes[static_cast<std::size_t>(k)]);
  const Eigen::VectorXd y = apply(op, uv, tv);

  OracleReport report;
  for (int node : probe_nodes) {
    ProbeResult pr;
    pr.node = node;
    pr.x = mesh.node(node);
    pr.got = y(node);
    pr.expected = expected(pr.x);
    pr.rel_err = std::abs(pr.got - pr.expected) /
                 std::max(std::abs(pr.expected), 1e-12);
    report.max_rel_err = std::max(report.max_rel_err, pr.rel_err);
    report.probes.push_back(pr);
  }
  return report;
}

StructureReport structure_report(const OperatorMatrix& op) {
  StructureReport rep;
  const int M = op.size();
  rep.min_diag = op.interior.diagonal().minCoeff();
  rep.max_offdiag = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (i != j) rep.max_offdiag = std::max(rep.max_offdiag, op.interior(i, j));
  rep.max_boundary_entry = op.boundary.maxCoeff();

  for (int i = 0; i < M; ++i) {
    const double mass =
        op.interior.row(i).cwiseAbs().sum() + op.boundary.row(i).cwiseAbs().sum();
    rep.max_row_abs_sum = std::max(rep.max_row_abs_sum, mass);
  }
  for (int i = 0; i < M; ++i) {
    const double target =
        op.kind == OperatorKind::Full ? op.phi_nodes(i) : 0.0;
    const double defect = std::abs(op.interior.row(i).sum() +
                                   op.boundary.row(i).sum() - target);
    rep.max_rowsum_defect_rel =
        std::max(rep.max_rowsum_defect_rel, defect / rep.max_row_abs_sum);
  }
  return rep;
}

}  // namespace rflab
