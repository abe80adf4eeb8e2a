#include "cvarlab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cvarlab {

int resolve_thread_count(int requested, long jobs) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* cap = std::getenv("CVARLAB_THREADS")) {
        int c = std::atoi(cap);
        if (c >= 1 && c < n) n = c;
    }
    if (jobs < n) n = static_cast<int>(jobs);
    return n < 1 ? 1 : n;
}

void parallel_for(long jobs, int requested_threads, const std::function<void(long)>& fn) {
    if (jobs <= 0) return;
    const int workers = resolve_thread_count(requested_threads, jobs);
    if (workers == 1) {
        for (long i = 0; i < jobs; ++i) fn(i);
        return;
    }

    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        while (true) {
            long i = next.fetch_add(1);
            if (i >= jobs) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace cvarlab
