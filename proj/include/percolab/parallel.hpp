#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

// Trial-level worker pool.  Work items are claimed through an atomic
// counter and every result lands in a caller-owned slot indexed by trial,
// so aggregation is independent of the thread count.

namespace percolab {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// fn(trial) is called exactly once for each trial in [0, trials).
template <class F>
void parallel_trials(std::int64_t trials, int threads, F&& fn) {
    threads = resolve_threads(threads);
    if (threads == 1 || trials <= 1) {
        for (std::int64_t t = 0; t < trials; ++t) fn(t);
        return;
    }
    std::atomic<std::int64_t> next{0};
    constexpr std::int64_t chunk = 8;
    auto worker = [&] {
        for (;;) {
            const std::int64_t lo = next.fetch_add(chunk, std::memory_order_relaxed);
            if (lo >= trials) return;
            const std::int64_t hi = lo + chunk < trials ? lo + chunk : trials;
            for (std::int64_t t = lo; t < hi; ++t) fn(t);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace percolab
