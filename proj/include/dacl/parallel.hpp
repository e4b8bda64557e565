#pragma once

#include <cstdint>
#include <functional>

namespace dacl {

// Worker cap: DACL_THREADS env var when set, otherwise hardware concurrency.
int worker_count();

// Runs fn(begin, end) over a fixed partition of [0, n). The partition depends
// only on n and the worker cap, and every index is processed by exactly one
// worker, so results are bit-identical for any thread count provided fn writes
// disjoint outputs per index.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace dacl
