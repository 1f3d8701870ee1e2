#include "reefseg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace reefseg {
namespace {

std::size_t threads_from_env() {
    const char* value = std::getenv("REEFSEG_THREADS");
    if (!value || !*value) return 0;
    try {
        return static_cast<std::size_t>(std::stoul(value));
    } catch (...) {
        return 0;
    }
}

std::atomic<std::size_t>& thread_setting() {
    static std::atomic<std::size_t> setting{threads_from_env()};
    return setting;
}

constexpr std::size_t kMinChunk = 2048;

}  // namespace

std::size_t worker_threads() { return thread_setting().load(); }

void set_worker_threads(std::size_t count) { thread_setting().store(count); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t requested = worker_threads();
    const std::size_t workers = std::min(requested, n / kMinChunk);
    if (workers <= 1) {
        if (n > 0) body(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&, t, begin, end] {
            try {
                if (begin < end) body(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace reefseg
