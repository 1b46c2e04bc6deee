#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace ssde {

// Worker cap shared by all studies; 0 means machine parallelism.
inline std::atomic<unsigned>& max_threads_knob() {
    static std::atomic<unsigned> knob{0};
    return knob;
}
inline void set_max_threads(unsigned n) { max_threads_knob().store(n); }
inline unsigned max_threads() { return max_threads_knob().load(); }

// Runs body(i) for i in [0, count). Each index owns its outputs, so the
// result is independent of scheduling.
inline void parallel_for(int count, const std::function<void(int)>& body) {
    unsigned workers = max_threads();
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(count > 0 ? count : 1));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (int i = static_cast<int>(w); i < count; i += static_cast<int>(workers))
                body(i);
        });
    }
    for (auto& t : pool)
        t.join();
}

} // namespace ssde
