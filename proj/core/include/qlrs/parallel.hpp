// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qlrs {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(index, worker_id) for every index in [0, n). Work is pulled from
/// an atomic counter, so the index-to-thread assignment is nondeterministic;
/// callers must write results into per-index slots and reduce in index order
/// to stay independent of the worker count.
inline void parallel_for(long long n, int workers,
                         const std::function<void(long long, int)>& fn) {
  const int nw = std::min<long long>(resolve_workers(workers), n > 0 ? n : 1);
  if (n <= 0) return;
  if (nw <= 1) {
    for (long long i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::atomic<long long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (;;) {
          const long long i = next.fetch_add(1, std::memory_order_relaxed);
          if (i >= n) break;
          fn(i, w);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qlrs
