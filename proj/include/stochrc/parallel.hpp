#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace stochrc {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static contiguous partition of [0, n) across workers. Callers own
// determinism: each chunk must write to its own state and merges must be
// order-independent (or performed in chunk order), so results never depend
// on the worker count.
template <typename Fn>
void parallel_chunks(std::size_t n, int threads, Fn&& fn) {
    threads = resolve_threads(threads);
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n == 0 ? 1 : n);
    if (nt <= 1) {
        fn(std::size_t{0}, n, std::size_t{0});
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t base = n / nt, extra = n % nt;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < nt; ++w) {
        const std::size_t len = base + (w < extra ? 1 : 0);
        pool.emplace_back([&fn, begin, len, w] { fn(begin, begin + len, w); });
        begin += len;
    }
    for (auto& t : pool) t.join();
}

} // namespace stochrc
