// Benchmark of the row-parallel operator assembly against the serial
// reference implementation.  Both produce bit-identical matrices (rows are
// independent), so the comparison also doubles as a correctness check.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "rflab/operator_matrix.hpp"

namespace {

double max_rel_diff(const rflab::OperatorMatrix& a,
                    const rflab::OperatorMatrix& b) {
  const double scale =
      std::max({a.interior.cwiseAbs().maxCoeff(),
                a.boundary.cwiseAbs().maxCoeff(), 1e-300});
  const double d =
      std::max({(a.interior - b.interior).cwiseAbs().maxCoeff(),
                (a.boundary - b.boundary).cwiseAbs().maxCoeff(),
                (a.phi_nodes - b.phi_nodes).cwiseAbs().maxCoeff()});
  return d / scale;
}

template <typename F>
double best_ms(int repeat, F&& body) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assembly benchmark: parallel kernels vs serial reference"};
  std::vector<int> sizes = {64, 128, 256};
  double alpha = 0.75;
  double gamma = 3.0;
  std::string domain_kind = "interval";
  int dim = 3;
  std::string kind_name = "regional";
  int repeat = 3;
  app.add_option("--sizes", sizes, "interior node counts to benchmark");
  app.add_option("--alpha", alpha, "fractional order in (0, 1)");
  app.add_option("--gamma", gamma, "mesh grading exponent");
  app.add_option("--domain", domain_kind, "interval | ball");
  app.add_option("--dim", dim, "ball dimension");
  app.add_option("--kind", kind_name, "regional | full");
  app.add_option("--repeat", repeat, "repetitions; best time is reported");
  CLI11_PARSE(app, argc, argv);

  const rflab::Domain domain = domain_kind == "ball"
                                   ? rflab::Domain::ball(1.0, dim)
                                   : rflab::Domain::interval(-1.0, 1.0);
  const rflab::OperatorKind kind = kind_name == "full"
                                       ? rflab::OperatorKind::Full
                                       : rflab::OperatorKind::Regional;
  const rflab::FractionalOrder order(alpha);

#ifdef _OPENMP
  std::printf("# OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("# OpenMP: not enabled\n");
#endif
  std::printf("# domain=%s alpha=%g gamma=%g kind=%s repeat=%d\n",
              domain_kind.c_str(), alpha, gamma, kind_name.c_str(), repeat);
  std::printf("%8s %14s %14s %9s %12s\n", "M", "serial [ms]", "parallel [ms]",
              "speedup", "max rel diff");

  for (int m : sizes) {
    const rflab::GradedMesh mesh = rflab::build_mesh(domain, m, gamma);
    rflab::OperatorMatrix serial, parallel;
    const double ts = best_ms(
        repeat, [&] { serial = rflab::assemble_reference(mesh, order, kind); });
    const double tp =
        best_ms(repeat, [&] { parallel = rflab::assemble(mesh, order, kind); });
    std::printf("%8d %14.2f %14.2f %8.2fx %12.2e\n", m, ts, tp, ts / tp,
                max_rel_diff(serial, parallel));
  }
  return 0;
}
