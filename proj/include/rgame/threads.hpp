#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace rgame {

// Worker count: hardware concurrency capped by RATIONALE_GAME_THREADS.
// Only embarrassingly parallel read-only loops use this, and their results
// are merged in index order, so the thread count never changes any output.
inline std::size_t worker_count() {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("RATIONALE_GAME_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1 && static_cast<std::size_t>(cap) < n) n = static_cast<std::size_t>(cap);
        } catch (...) {
        }
    }
    return n;
}

// Runs fn(i) for i in [0, n) across workers; fn must not touch shared state.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(worker_count(), n == 0 ? std::size_t(1) : n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace rgame
