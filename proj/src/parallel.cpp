#include "meshres/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace meshres {

int thread_cap() {
    const char* env = std::getenv("MESHRES_THREADS");
    if (!env)
        return 1;
    int n = std::atoi(env);
    return n < 1 ? 1 : n;
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    int threads = thread_cap();
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n || failed.load())
                return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true))
                    error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int count = static_cast<int>(std::min<size_t>(threads, n));
    pool.reserve(count);
    for (int t = 0; t < count; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (failed.load())
        std::rethrow_exception(error);
}

} // namespace meshres
