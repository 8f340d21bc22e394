#ifndef FSPLAT_PARALLEL_HPP
#define FSPLAT_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace fsplat {

/// Runs fn(i) for i in [begin, end) across `threads` workers.
///
/// Work is claimed through a shared atomic counter, so which thread runs a
/// given index is not fixed — callers must write results to disjoint,
/// index-addressed slots. Reductions that need a fixed order are done by the
/// caller after the loop, in index order. That keeps every result independent
/// of the worker count.
template <typename Fn>
void parallel_for(int64_t begin, int64_t end, int threads, Fn&& fn) {
    if (end <= begin) return;
    if (threads <= 1 || end - begin == 1) {
        for (int64_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<int64_t> next(begin);
    std::atomic<bool> failed(false);
    std::exception_ptr error;
    std::vector<std::thread> pool;
    auto worker = [&] {
        for (;;) {
            const int64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= end || failed.load(std::memory_order_relaxed)) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    const int64_t span = end - begin;
    const int nworkers = static_cast<int>(threads < span ? threads : span);
    pool.reserve(static_cast<size_t>(nworkers - 1));
    for (int w = 1; w < nworkers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline int clamp_threads(int requested) {
    if (requested < 1) return 1;
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int cap = hw > 0 ? 4 * hw : 16;
    return requested > cap ? cap : requested;
}

}  // namespace fsplat

#endif
