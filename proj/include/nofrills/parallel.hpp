#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace nofrills {

/// Worker cap: NOFRILLS_THREADS when set (clamped to >= 1), otherwise the
/// hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("NOFRILLS_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(0..n-1) across up to `workers` threads (worker_count() when 0).
/// Callers are responsible for writing results into disjoint slots.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t)>& fn,
                         int workers = 0) {
  if (workers <= 0) workers = worker_count();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int count = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  pool.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace nofrills
