#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lorenzlab {

// Runs body(i) for i in [0, n) on at most `workers` threads. Results must be
// written to per-index slots by the caller, so ordering never depends on
// scheduling. The first exception is rethrown after all threads finish.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace lorenzlab
