#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mdir {

// Worker count for parallel loops: `requested` if positive, otherwise the
// OpenMP default, both capped by the MDIR_THREADS environment variable.
inline int resolve_threads(int requested = 0) {
#ifdef _OPENMP
    int n = requested > 0 ? requested : omp_get_max_threads();
#else
    int n = requested > 0 ? requested : 1;
#endif
    if (const char* env = std::getenv("MDIR_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0 && cap < n) n = cap;
    }
    return n < 1 ? 1 : n;
}

// Index of the current worker inside a parallel_for body, 0 when serial.
inline int worker_id() {
#ifdef _OPENMP
    return omp_get_thread_num();
#else
    return 0;
#endif
}

// Static-schedule parallel loop over [0, n). The body must only write to
// per-iteration slots; reductions happen afterwards in index order so that
// results do not depend on the worker count.
template <class F>
void parallel_for(std::int64_t n, int threads, F&& body) {
#ifdef _OPENMP
    // Always open a region, even for one thread: worker_id() must refer to
    // this loop's team, not an enclosing parallel region of a caller.
    const int nt = threads < 1 ? 1 : threads;
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) body(i);
#else
    (void)threads;
    for (std::int64_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace mdir
