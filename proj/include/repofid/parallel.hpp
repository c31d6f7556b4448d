#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace repofid {

// Runs fn(i) for i in [0, n). The serial path is the reference used by tests
// and the benchmark; the OpenMP path must produce identical results for any
// per-item-independent fn (items write only their own slots).
template <typename Fn>
void serial_for(size_t n, Fn&& fn) {
    for (size_t i = 0; i < n; ++i) {
        fn(i);
    }
}

template <typename Fn>
void parallel_for(size_t n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n < 2) {
        serial_for(n, fn);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        fn(static_cast<size_t>(i));
    }
#else
    serial_for(n, fn);
#endif
}

inline int hardware_jobs() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace repofid
