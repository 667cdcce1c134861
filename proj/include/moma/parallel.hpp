#pragma once

#include <algorithm>
#include <cstddef>

#include <omp.h>

namespace moma {

/// Number of worker threads used by parallel maps. Values < 1 select the OpenMP default.
void set_thread_count(int threads);
int thread_count() noexcept;

/// Calls fn(i) for i in [0, n). Static schedule; each i is computed by exactly
/// one thread, so per-element results never depend on the thread count.
template <class Fn> void parallel_for(std::size_t n, Fn&& fn) {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::ptrdiff_t i = 0; i < count; ++i)
        fn(static_cast<std::size_t>(i));
}

/// Calls fn(begin, end) on contiguous chunks covering [0, n). Used when each
/// worker needs its own scratch buffers.
template <class Fn> void parallel_for_chunked(std::size_t n, Fn&& fn, std::size_t grain = 64) {
    const std::size_t chunks = (n + grain - 1) / std::max<std::size_t>(grain, 1);
    const auto count = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        const std::size_t begin = static_cast<std::size_t>(k) * grain;
        fn(begin, std::min(n, begin + grain));
    }
}

} // namespace moma
