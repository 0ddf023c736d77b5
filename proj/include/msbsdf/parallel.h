// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace msbsdf {

/// Worker count: an explicit positive request wins, then MSBSDF_THREADS,
/// then the hardware concurrency.
inline int resolve_thread_count(int requested) {
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("MSBSDF_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0)
            return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n) on `threads` workers pulling indices from a
/// shared counter. Callers write results into per-index slots, so the
/// schedule never affects the output.
template <class Fn>
void parallel_for(long n, int threads, Fn&& fn) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(std::min<long>(n, 1L << 20))));
    if (threads <= 1) {
        for (long i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (long i = next++; i < n; i = next++)
                fn(i);
        });
    for (auto& th : pool)
        th.join();
}

}  // namespace msbsdf
