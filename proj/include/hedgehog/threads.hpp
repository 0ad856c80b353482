#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hedgehog {

// Worker count: HEDGEHOG_THREADS if set and positive, else hardware
// concurrency.  Work is always split into a fixed number of shards so
// results do not depend on the thread count.
inline int thread_count() {
    if (const char* env = std::getenv("HEDGEHOG_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t)>& fn) {
    const int workers =
        std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace hedgehog
