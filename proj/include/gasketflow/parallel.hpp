#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace gasketflow {

// Worker count: GASKETFLOW_THREADS if set to a positive integer, otherwise the
// hardware concurrency.
inline unsigned thread_budget() {
    if (const char* env = std::getenv("GASKETFLOW_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n >= 1) return static_cast<unsigned>(n);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// results[i] = fn(i). Work is split in contiguous blocks and results are kept
// in index order, so output does not depend on the thread count.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, F fn) {
    std::vector<T> results(count);
    const std::size_t workers = std::min<std::size_t>(thread_budget(), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t block = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w * block; i < std::min(count, (w + 1) * block); ++i) results[i] = fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

}  // namespace gasketflow
