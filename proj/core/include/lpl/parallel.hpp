#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace lpl {

/// Runs fn(0..n-1) across `threads` workers. Each index is processed exactly
/// once; callers keep determinism by writing to pre-assigned slots. threads
/// <= 1 degrades to a plain loop.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int n_workers = std::min(threads, n);
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace lpl
