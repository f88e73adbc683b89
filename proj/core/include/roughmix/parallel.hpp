#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace roughmix {

/// Resolves a thread-count hint: 0 means "use the hardware concurrency".
inline unsigned resolve_threads(unsigned hint) noexcept {
    if (hint != 0) return hint;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Evaluates `fn(i)` for i in [0, count) on up to `threads` workers and
/// returns the results in index order. Callers reduce the returned vector
/// sequentially, so results never depend on the thread count. The first
/// exception thrown by any task is rethrown after all workers join.
template <class Fn>
auto parallel_map(std::size_t count, unsigned threads, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using Result = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<Result> out(count);
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        out[i] = fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace roughmix
