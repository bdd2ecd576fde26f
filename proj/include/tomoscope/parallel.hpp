#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace tomoscope::parallel {

/// Run body(i) for i in [0, count) across at most `threads` worker threads.
///
/// Work is dealt in fixed contiguous blocks decided up front, so the mapping
/// from index to thread never depends on scheduling. Callers get determinism
/// for free as long as body(i) writes only to slot i of preallocated output.
/// The first exception thrown by any worker is rethrown on the caller.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    int nt = std::max(1, threads);
    nt = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(nt), count));
    if (nt == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t block = (count + static_cast<std::size_t>(nt) - 1) / static_cast<std::size_t>(nt);
    for (int t = 0; t < nt; ++t) {
        const std::size_t begin = static_cast<std::size_t>(t) * block;
        const std::size_t end = std::min(count, begin + block);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end]() {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace tomoscope::parallel
