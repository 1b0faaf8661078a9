#pragma once

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace rflab {

/// Number of OpenMP threads the parallel kernels will use (1 when built
/// without OpenMP).
inline int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Row/node-parallel loop helper.  Every iteration must be independent; the
/// static schedule plus disjoint writes keep results bit-identical for any
/// thread count.
template <class F>
void parallel_for(int n, F&& body) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) body(i);
#else
  for (int i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace rflab
