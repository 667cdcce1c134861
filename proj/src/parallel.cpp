#include "moma/parallel.hpp"

#include <atomic>

namespace moma {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int threads) { g_threads.store(threads > 0 ? threads : 0); }

int thread_count() noexcept {
    const int t = g_threads.load();
    return t > 0 ? t : omp_get_max_threads();
}

} // namespace moma
