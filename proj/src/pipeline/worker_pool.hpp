#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ssl3d::detail {

// Runs task(i) for i in [0, n) on up to `workers` threads. The first
// exception is rethrown after all threads finish.
inline void parallel_for_each(std::size_t n, int workers, const std::function<void(std::size_t)>& task) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  const auto count = static_cast<std::size_t>(std::max(1, workers));
  {
    std::vector<std::jthread> threads;
    for (std::size_t t = 1; t < std::min(count, n); ++t) threads.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace ssl3d::detail
