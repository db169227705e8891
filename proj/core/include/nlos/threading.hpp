#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace nlos {

// Worker count: NLOS_THREADS if set, else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("NLOS_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Statically partitioned parallel loop over [0, n). Chunk assignment depends
// only on n and the worker count, and workers write disjoint index ranges,
// so results are independent of scheduling.
inline void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body) {
  int workers = worker_count();
  if (n <= 0) return;
  if (workers <= 1 || n < 2 * workers) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int64_t lo = w * chunk;
    int64_t hi = std::min<int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace nlos
