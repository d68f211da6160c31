#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace seqslam {

/// Worker count resolution: 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Number of chunks parallel_chunks will use for `count` items.
inline std::size_t chunk_count(std::size_t count, unsigned threads) {
    return std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1));
}

/// Splits [0, count) into contiguous ordered chunks, one per worker, and calls
/// body(chunk, begin, end) for each. Chunk boundaries depend only on count and
/// the worker count, and every index is handled by exactly one call.
template <typename Body>
void parallel_chunks(std::size_t count, unsigned threads, Body&& body) {
    const std::size_t workers = chunk_count(count, threads);
    if (workers <= 1) {
        body(std::size_t{0}, std::size_t{0}, count);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = count * w / workers;
            const std::size_t end = count * (w + 1) / workers;
            pool.emplace_back([&, w, begin, end] {
                try {
                    body(w, begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace seqslam
