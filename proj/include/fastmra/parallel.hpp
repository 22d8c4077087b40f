// Chunked parallel loop over observations.
//
// Work is split into fixed-size chunks whose boundaries depend only on n
// and the chunk size, never on the thread count. Callers keep one partial
// result per chunk and combine them in chunk order, so reductions are
// bit-identical for any number of threads.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fastmra {

inline constexpr std::size_t kDefaultChunk = 2048;

struct ChunkRange {
    std::size_t begin;
    std::size_t end;
    std::size_t index;
};

inline std::size_t chunk_count(std::size_t n, std::size_t chunk = kDefaultChunk) {
    return (n + chunk - 1) / chunk;
}

/// Number of worker threads for a requested count; 0 means "all cores".
inline unsigned resolve_threads(int requested) {
    if (requested > 0) {
        return static_cast<unsigned>(requested);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

template <class Fn>
void for_each_chunk(std::size_t n, int threads, Fn&& fn, std::size_t chunk = kDefaultChunk) {
    const std::size_t chunks = chunk_count(n, chunk);
    auto range_of = [&](std::size_t c) {
        return ChunkRange{c * chunk, std::min(n, (c + 1) * chunk), c};
    };
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) {
            fn(range_of(c));
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t c = next++; c < chunks; c = next++) {
            try {
                fn(range_of(c));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = chunks;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace fastmra
