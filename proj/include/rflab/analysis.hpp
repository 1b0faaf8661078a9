#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rflab/geometry.hpp"
#include "rflab/nonlinearity.hpp"
#include "rflab/operator_matrix.hpp"
#include "rflab/solver.hpp"

namespace rflab {

/// Least-squares power-law fit  value ~ C * rho^beta  over a boundary-distance
/// window.
struct RateFit {
  double beta = 0.0;       ///< fitted exponent (signed)
  double intercept = 0.0;  ///< log C
  double r_squared = 0.0;
  double rho_lo = 0.0, rho_hi = 0.0;  ///< window actually used
  int node_count = 0;
};

/// Fit window in boundary distance; nonpositive entries select the defaults
/// rho_lo = 5 * h_min and rho_hi = 0.1 * diameter.
struct FitWindow {
  double rho_lo = 0.0;
  double rho_hi = 0.0;
};

/// Fits log(values) against log(rho) over the window, excluding the two
/// nodes nearest each boundary (they sit inside the discretization layer).
/// Throws ValidationError when a window value is nonpositive or fewer than
/// six nodes remain.
RateFit fit_rate(const GradedMesh& mesh, const Eigen::VectorXd& values,
                 FitWindow window = {});
RateFit fit_rate(const SolutionField& u, FitWindow window = {});

/// Boundary-rate interval check for blow-up solutions of power
/// nonlinearities.  The regional operator predicts
/// |beta| in [(2a-1)/(p-1), 2a/(p-1)], the full operator [2a/(p-1), 2a/(p-1)]
/// (a single power family has matching lower and upper exponents p = q).
struct SandwichVerdict {
  double predicted_lower = 0.0;  ///< lower |beta| endpoint
  double predicted_upper = 0.0;  ///< upper |beta| endpoint
  RateFit fitted;
  double inflation = 0.0;
  bool pass = false;
};

/// inflation <= 0 selects the calibrated defaults: 0.05 for the regional
/// interval check, 0.1 for the exact full-operator rate.
SandwichVerdict sandwich_verdict(const SolutionField& u, const Nonlinearity& f,
                                 FractionalOrder alpha, double inflation = -1.0,
                                 FitWindow window = {});

/// Discrete Green-function bound: with entries converted to kernel densities
/// by the target-node cell weight, the ratio against
///   min{ |x-y|^{-(N-2a)},  rho(x)^{2a-1} rho(y)^{2a-1} / |x-y|^{N-2+2a} }
/// should stay bounded under refinement.
struct GreenBoundReport {
  double ratio = 0.0;          ///< max over node pairs i != j
  double min_entry = 0.0;      ///< most negative matrix entry
  double max_entry = 0.0;
  bool nonnegative = false;    ///< min_entry >= -1e-10 * max_entry
};

GreenBoundReport green_bound_check(const GreenMatrix& green,
                                   const GradedMesh& mesh,
                                   FractionalOrder alpha);

/// Assembles the operator at m and 2m nodes and compares the bound ratios.
struct GreenBoundStability {
  GreenBoundReport coarse, fine;
  double change = 0.0;  ///< |fine - coarse| / coarse
};

GreenBoundStability green_bound_stability(const Domain& domain,
                                          FractionalOrder alpha,
                                          OperatorKind kind, int m,
                                          double gamma);

/// Layer diagnostics for the nonexistence regime: the boundary level n only
/// reaches depth r_n = (lambda n)^{-(p-1)/(2a-1)}, and the solution minimum
/// over the layer r_n < rho <= 2 r_n grows like r_n^{-(2a-1)/(p-1)}.
struct LayerConfig {
  double lambda = 0.0;  ///< layer constant; <= 0 fits it from the levels
  double inner = 1.0;   ///< layer is (inner * r_n, outer * r_n]
  double outer = 2.0;
};

struct NonexistenceReport {
  bool in_regime = false;  ///< p <= 1 + 2a and p < a / (1 - a)
  double lambda = 0.0;     ///< configured or fitted layer constant
  double layer_exponent_predicted = 0.0;  ///< (2a-1)/(p-1)
  RateFit layer_fit;       ///< log layer-minimum vs log r_n
  bool layer_exponent_ok = false;  ///< fitted within +-0.15 of predicted
  double max_bound_deviation = 0.0;  ///< rel. deviation from (1/2l) rho^-k
  std::vector<double> center_values;  ///< per level, node nearest the center
  bool center_strictly_increasing = false;
  double top_ratio = 0.0;  ///< last center value over the previous one
};

NonexistenceReport nonexistence_diagnostics(const BlowupResult& result,
                                            const Nonlinearity& f,
                                            FractionalOrder alpha,
                                            const LayerConfig& config = {});

}  // namespace rflab
