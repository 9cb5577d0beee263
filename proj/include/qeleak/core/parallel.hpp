#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qeleak {

// Runs fn(i) for i in [0, n) on at most max_in_flight threads. The first
// exception thrown by any task is rethrown after all workers stop; remaining
// tasks are not started once a task has failed.
template <typename Fn>
void parallel_for(size_t n, int max_in_flight, Fn&& fn) {
  const size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, max_in_flight)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < n && !failed.load(); i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace qeleak
