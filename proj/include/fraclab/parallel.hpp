// Deterministic task-parallel loop: results are written per index, so the
// outcome is identical for any worker count.
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace fraclab {

inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  int w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = static_cast<std::size_t>(t); i < n; i += static_cast<std::size_t>(w)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace fraclab
