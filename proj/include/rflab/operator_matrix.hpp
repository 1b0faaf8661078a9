#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "rflab/geometry.hpp"

namespace rflab {

enum class OperatorKind { Regional, Full };

/// Dense collocation matrix of the regional operator
///   (-Delta)^a_Omega u(x) = p.v. Int_Omega (u(x)-u(y)) |x-y|^{-(N+2a)} dy
/// on the interior nodes of a graded mesh, plus the couplings to the
/// Dirichlet trace at the boundary nodes.  The full-space operator on
/// functions vanishing outside the closure adds the exterior mass on the
/// diagonal:  (-Delta)^a u = (-Delta)^a_Omega u + phi u.
///
/// Scheme: piecewise-linear far field integrated cell by cell with the exact
/// kernel antiderivatives; near field on the symmetric window
/// (x_i - m, x_i + m), m = min(h-, h+), replaces u by the quadratic through
/// (x_{i-1}, x_i, x_{i+1}) -- the principal value of the linear part cancels
/// by symmetry and the quadratic part has the finite moment m2.  The
/// leftover sliver of the wider adjacent cell is integrated against the
/// piecewise-linear interpolant with the m1 moment.  This keeps the sign
/// structure of a nonlocal M-matrix (positive diagonal, nonpositive
/// couplings) on arbitrarily graded meshes.
struct OperatorMatrix {
  OperatorKind kind = OperatorKind::Regional;
  FractionalOrder alpha{0.5};
  GradedMesh mesh;

  Eigen::MatrixXd interior;   ///< M x M block acting on interior values
  Eigen::MatrixXd boundary;   ///< M x (#trace nodes) couplings to the trace
  Eigen::VectorXd phi_nodes;  ///< exterior mass at the nodes (both kinds)

  int size() const { return static_cast<int>(interior.rows()); }
};

/// Row-parallel assembly (OpenMP when available; bit-identical for any
/// thread count since rows are independent).
OperatorMatrix assemble(const GradedMesh& mesh, FractionalOrder alpha,
                        OperatorKind kind);

/// Plain serial implementation of the same scheme, kept as the reference for
/// correctness tests and the assembly benchmark.
OperatorMatrix assemble_reference(const GradedMesh& mesh, FractionalOrder alpha,
                                  OperatorKind kind);

/// y = A u + B t  (linear; shapes validated).
Eigen::VectorXd apply(const OperatorMatrix& op, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& trace);

struct ProbeResult {
  int node = 0;
  double x = 0.0;
  double got = 0.0;
  double expected = 0.0;
  double rel_err = 0.0;
};

struct OracleReport {
  std::vector<ProbeResult> probes;
  double max_rel_err = 0.0;
};

/// Applies the assembled operator to the nodal samples of `u` (trace taken
/// from `u` at the boundary nodes) and compares with `expected` at the given
/// interior nodes.  The expected values come from an independent oracle.
OracleReport validate_against_oracle(const OperatorMatrix& op,
                                     const std::function<double(double)>& u,
                                     const std::function<double(double)>& expected,
                                     const std::vector<int>& probe_nodes);

/// Structural diagnostics backing the discrete comparison principle.
struct StructureReport {
  double min_diag = 0.0;            ///< should be > 0
  double max_offdiag = 0.0;         ///< should be <= ~0 (quadrature tolerance)
  double max_boundary_entry = 0.0;  ///< should be <= ~0
  double max_rowsum_defect_rel = 0.0;  ///< |row sum - target| / max row mass
  double max_row_abs_sum = 0.0;
};

/// Row sums of regional rows (with trace couplings) vanish; full rows equal
/// phi.  Reported defect is relative to the largest row mass.
StructureReport structure_report(const OperatorMatrix& op);

}  // namespace rflab
