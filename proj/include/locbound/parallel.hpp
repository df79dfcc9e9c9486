#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace locbound::parallel {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// independent; callers store per-index results and reduce afterwards in
/// index order, so the outcome never depends on the schedule. The first
/// exception thrown by any body is rethrown on the calling thread.
template <typename Body>
void for_each_index(std::size_t n, int workers, Body&& body) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> pool;
  pool.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace locbound::parallel
