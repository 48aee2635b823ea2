#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace klab {

// Process-wide worker count; 0 means hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Static block partition of [0, n). The body must be safe to run
// concurrently on disjoint index ranges; results must not depend on the
// schedule (commutative merges, per-index output slots).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Convenience per-index form.
inline void parallel_for_each(std::size_t n, const std::function<void(std::size_t)>& f) {
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) f(i);
    });
}

}  // namespace klab
