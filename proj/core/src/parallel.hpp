#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace coulomb::detail {

// COULOMB_THREADS when set, else the hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("COULOMB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1, int(std::thread::hardware_concurrency()));
}

// Runs body(chunk) for chunk = 0..chunks-1 on up to worker_count() threads.
// Results indexed by chunk keep reductions independent of the thread count.
inline void for_chunks(int chunks, const std::function<void(int)>& body) {
  const int workers = std::min(chunks, worker_count());
  if (workers <= 1) {
    for (int c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int c = w; c < chunks; c += workers) body(c);
    });
  for (auto& t : pool) t.join();
}

}  // namespace coulomb::detail
