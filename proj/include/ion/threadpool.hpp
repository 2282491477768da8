#ifndef ION_THREADPOOL_HPP
#define ION_THREADPOOL_HPP

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace ion {

// Runs fn(i) for i in [0, n). Work items must be independent; results are
// merge-only (each item writes its own slot).
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int m = std::min<std::size_t>(threads, n);
    pool.reserve(m);
    for (int t = 0; t < m; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace ion

#endif
