// SPDX-License-Identifier: Apache-2.0
#include "qmce/parallel.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace qmce {

int worker_count() {
    static const int count = [] {
        const char* env = std::getenv("QMCE_WORKERS");
        if (env == nullptr) return 1;
        const int n = std::atoi(env);
        return n >= 1 ? n : 1;
    }();
    return count;
}

void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
    if (n <= 0) return;
    if (workers <= 1 || n == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    const int used = static_cast<int>(std::min<long>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(used);
    for (int w = 0; w < used; ++w) {
        pool.emplace_back([&fn, n, used, w] {
            for (long i = w; i < n; i += used) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace qmce
