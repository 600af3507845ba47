#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace epichaos {

/// Worker count: EPICHAOS_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
inline std::size_t thread_count() {
    if (const char* env = std::getenv("EPICHAOS_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
/// write results into per-index slots so the outcome does not depend on the
/// schedule. If any call throws, the exception of the lowest failing index
/// is rethrown after all workers finish.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t threads = thread_count()) {
    if (n == 0) return;
    threads = std::clamp<std::size_t>(threads, 1, n);
    std::vector<std::exception_ptr> errors(n);
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace epichaos
