#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace angio {

/// Run fn(i) for i in [begin, end) across up to `threads` workers.
/// The range is split into contiguous chunks, one per worker, so each
/// index is processed exactly once; fn must not write outside its own
/// index's outputs. Results are independent of the worker count.
inline void parallel_for(int begin, int end, int threads,
                         const std::function<void(int)>& fn) {
    const int n = end - begin;
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    const int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + static_cast<int>(static_cast<long long>(n) * w / workers);
        const int hi = begin + static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace angio
