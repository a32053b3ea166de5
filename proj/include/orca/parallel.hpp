#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace orca {

// Evaluates f(0..n-1) into a vector. Work is spread over threads but each
// result lands in its own slot, so the output does not depend on scheduling.
// The first exception (by index) is rethrown.
template <class F>
auto parallel_map(std::size_t n, F f, unsigned threads = 0) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errors(n);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    auto run = [&](std::size_t k) {
        try {
            out[k] = f(k);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    if (threads <= 1) {
        for (std::size_t k = 0; k < n; ++k) run(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < n; k = next++) run(k);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace orca
