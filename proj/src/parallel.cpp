#include "dacl/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace dacl {

int worker_count() {
    static const int cached = [] {
        if (const char* env = std::getenv("DACL_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }();
    return cached;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    const int workers = std::min<std::int64_t>(worker_count(), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    const std::int64_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(workers - 1));
    for (int w = 1; w < workers; ++w) {
        std::int64_t b = w * chunk;
        std::int64_t e = std::min<std::int64_t>(n, b + chunk);
        if (b >= e) break;
        threads.emplace_back([&fn, b, e] { fn(b, e); });
    }
    fn(0, std::min<std::int64_t>(n, chunk));
    for (auto& t : threads) t.join();
}

}  // namespace dacl
