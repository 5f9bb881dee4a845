#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bect {

/// Execution policy for the data-parallel kernels (per-node eigensolves,
/// curvature fields, Floquet sweeps, contour nodes). Serial runs the same
/// loop body in index order and is kept as the reference path for tests and
/// benchmarks. Results are identical: workers only write disjoint slots and
/// every reduction is performed afterwards in fixed index order.
enum class Exec { Serial, Parallel };

namespace detail {
inline int& max_threads_override() {
  static int value = 0;  // 0 = runtime default
  return value;
}
}  // namespace detail

/// Cap the number of OpenMP threads used by parallel_for (0 restores default).
inline void set_max_threads(int n) { detail::max_threads_override() = n; }

template <typename Fn>
void parallel_for(std::size_t n, Exec exec, Fn&& fn) {
#ifdef _OPENMP
  if (exec == Exec::Parallel) {
    const int cap = detail::max_threads_override();
#pragma omp parallel for schedule(static) num_threads(cap > 0 ? cap : omp_get_max_threads())
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      fn(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace bect
