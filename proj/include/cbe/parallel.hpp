#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace cbe {

// Worker count: explicit argument > CBE_WORKERS env > hardware concurrency.
inline int default_workers() {
  if (const char* env = std::getenv("CBE_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

inline int resolve_workers(int workers) {
  return workers > 0 ? workers : default_workers();
}

// Runs fn(i) for i in [0, count). Each item must be independent and write
// only to its own output slot; determinism then holds for any worker count.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  workers = resolve_workers(workers);
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  pool.reserve(nthreads);
  for (int w = 0; w < nthreads - 1; ++w) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
}

}  // namespace cbe
