#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace framecot {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Slot i of the result holds fn(i),
// or nullopt when `cancel` was raised before item i started. In-flight items always finish.
// The first exception thrown by fn is rethrown after all workers stop.
template <typename T>
std::vector<std::optional<T>> parallel_map(std::size_t n, int workers, const std::function<T(std::size_t)>& fn,
                                           const std::atomic<bool>* cancel = nullptr) {
    std::vector<std::optional<T>> out(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;

    auto worker = [&] {
        for (;;) {
            if (cancel != nullptr && cancel->load()) return;
            {
                std::lock_guard lock(error_mu);
                if (error) return;
            }
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
            }
        }
    };

    const auto count = static_cast<std::size_t>(std::max(1, workers));
    if (count == 1 || n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(count, n); ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace framecot
