#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fracspde {

// Worker count: min(hardware, FRACSPDE_THREADS) with FRACSPDE_THREADS <= 0
// meaning "no cap".
inline int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("FRACSPDE_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) hw = std::min<long>(hw, cap);
    }
    return hw;
}

// Static block partition of [0, n). Results must be written to disjoint,
// index-addressed slots so the outcome is independent of scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const int workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace fracspde
