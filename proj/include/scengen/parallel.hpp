#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace scengen {

/// Hardware threads, at least 1.
inline unsigned default_threads() noexcept { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs body(k) for k in [0, n) on up to `threads` workers, each taking one
/// contiguous chunk. Bodies must write only to slot k of their outputs.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t k = 0; k < n; ++k) body(k);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t k = lo; k < hi; ++k) body(k);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace scengen
