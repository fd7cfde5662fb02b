#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <algorithm>
#include <thread>
#include <vector>

namespace fito {

// 0 means one worker per hardware thread.
inline std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks depend only on
// n and the worker count. If chunks throw, the exception of the lowest chunk
// is rethrown.
inline void parallel_for(std::size_t n, std::size_t workers,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    workers = std::min(resolve_workers(workers), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

}  // namespace fito
