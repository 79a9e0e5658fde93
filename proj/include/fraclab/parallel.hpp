#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace fraclab {

// Row-parallel loop over [0, n). Work items must be independent; results are
// written to caller-provided slots so the output is deterministic regardless
// of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t workers = hw ? hw : 1;
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (workers > n) workers = n;
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace fraclab
