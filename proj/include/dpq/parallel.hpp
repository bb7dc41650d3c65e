#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace dpq {

// Runs fn(chunk_index, begin, end) over fixed-size chunks of [0, n).
// Chunk boundaries depend only on n and chunk_size, never on the thread
// count, so per-chunk results (and any fixed-order reduction over them)
// are identical for any number of workers.
inline void parallel_chunks(int64_t n, int64_t chunk_size, int threads,
                            const std::function<void(int64_t, int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    const int64_t nchunks = (n + chunk_size - 1) / chunk_size;
    if (threads <= 1 || nchunks == 1) {
        for (int64_t c = 0; c < nchunks; ++c) {
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        }
        return;
    }
    std::atomic<int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const int64_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    const int nworkers = static_cast<int>(std::min<int64_t>(threads, nchunks));
    pool.reserve(nworkers);
    for (int t = 0; t < nworkers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

}  // namespace dpq
