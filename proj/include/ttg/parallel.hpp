#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace ttg {

// Global worker bound for parallel sweeps; 0 = hardware concurrency.
inline int& worker_count() {
  static int workers = 0;
  return workers;
}

// Index-parallel loop with deterministic output: the callback writes into
// per-index slots, so the merge order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  int workers = worker_count() > 0
                    ? worker_count()
                    : int(std::thread::hardware_concurrency());
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = std::min<std::size_t>(workers, n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
        fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace ttg
