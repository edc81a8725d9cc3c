#pragma once

// Replica-level parallelism.  Every Monte Carlo driver runs the same
// per-index worker through one of these loops; the serial loop is the
// reference implementation used by the consistency tests and the benchmark.
// Workers write only to their own index, so results are bit-identical
// across thread counts.

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lab {

enum class Exec { serial, openmp };

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_thread_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

template <typename Fn>
void for_each_index(std::int64_t count, Exec exec, Fn&& fn) {
    if (exec == Exec::openmp) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
        for (std::int64_t i = 0; i < count; ++i) fn(i);
    } else {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
    }
}

} // namespace lab
