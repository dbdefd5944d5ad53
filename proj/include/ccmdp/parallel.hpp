#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace ccmdp {

/// Runs fn(i) for i in [0, n) across up to n_threads workers. Work items
/// must be independent; results should be written into caller-owned slots
/// indexed by i, so the outcome is identical for any thread count.
inline void parallel_for(int n, int n_threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (n_threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(n_threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace ccmdp
