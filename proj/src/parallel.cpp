#include "subflow/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace subflow {

int max_threads() {
  static const int cached = [] {
    if (const char* env = std::getenv("SUBFLOW_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
  }();
  return cached;
}

void parallel_for(int n, const std::function<void(int, int)>& body) {
  const int nt = max_threads();
  // Desk-scale grids: threading only pays off on the largest ones.
  if (nt <= 1 || n < 16384) {
    body(0, n);
    return;
  }
  const int slabs = std::min(nt, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(slabs) - 1);
  const int chunk = (n + slabs - 1) / slabs;
  for (int s = 1; s < slabs; ++s) {
    int b = s * chunk;
    int e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(0, std::min(n, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace subflow
