#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace restrictlab {

/// Worker count: explicit argument > RESTRICTLAB_THREADS > hardware.
inline unsigned thread_count(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RESTRICTLAB_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Runs fn(chunk_index, begin, end) over [0, n) split into a fixed number of
/// chunks that depends only on the problem size, never on the worker count.
/// Callers store per-chunk partials and combine them in chunk order, which
/// makes floating-point reductions bit-reproducible under any thread count.
inline std::size_t chunk_count(std::size_t n, std::size_t min_grain = 1024) {
    if (n == 0) return 0;
    std::size_t c = (n + min_grain - 1) / min_grain;
    if (c > 1024) c = 1024;
    return c ? c : 1;
}

inline void parallel_chunks(std::size_t n,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn,
                            unsigned threads = 0, std::size_t min_grain = 1024) {
    const std::size_t chunks = chunk_count(n, min_grain);
    if (chunks == 0) return;
    const unsigned workers = std::min<std::size_t>(thread_count(threads), chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) {
            std::size_t lo = n * c / chunks, hi = n * (c + 1) / chunks;
            fn(c, lo, hi);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t c = next.fetch_add(1);
                if (c >= chunks) return;
                std::size_t lo = n * c / chunks, hi = n * (c + 1) / chunks;
                try {
                    fn(c, lo, hi);
                } catch (...) {
                    std::lock_guard<std::mutex> g(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Deterministic parallel reduction: per-chunk partials combined in chunk
/// order with `combine`, independent of scheduling.
template <typename T, typename Map, typename Combine>
T parallel_reduce(std::size_t n, T init, Map&& map_chunk, Combine&& combine,
                  unsigned threads = 0, std::size_t min_grain = 1024) {
    const std::size_t chunks = chunk_count(n, min_grain);
    if (chunks == 0) return init;
    std::vector<T> partial(chunks, init);
    parallel_chunks(n, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        partial[c] = map_chunk(lo, hi);
    }, threads, min_grain);
    T total = init;
    for (std::size_t c = 0; c < chunks; ++c) total = combine(total, partial[c]);
    return total;
}

} // namespace restrictlab
