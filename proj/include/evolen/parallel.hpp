#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace evolen {

// 0 means "use hardware concurrency".
inline std::size_t resolve_threads(std::size_t requested) {
    if (requested) return requested;
    std::size_t hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Runs fn(begin, end, chunk_index) over `chunks` contiguous slices of [0, n).
// Callers must only write to per-index or per-chunk slots; reductions that
// need a canonical order fold the per-chunk results afterwards.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (n == 0) return;
    std::size_t chunks = std::min(threads, n);
    if (chunks <= 1) {
        fn(std::size_t{0}, n, std::size_t{0});
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    std::size_t per = n / chunks;
    std::size_t extra = n % chunks;
    std::size_t begin = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t len = per + (c < extra ? 1 : 0);
        std::size_t end = begin + len;
        pool.emplace_back([&fn, begin, end, c] { fn(begin, end, c); });
        begin = end;
    }
    for (auto& t : pool) t.join();
}

} // namespace evolen
