#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace airybeta {

// Runs body(i) for i in [0, n) on up to `workers` threads. Each index owns its
// output slot, so results are ordered by index whatever the completion order.
// The first exception thrown by any task is rethrown after all threads join.
template <class Body>
void parallel_for(long n, int workers, Body&& body) {
  if (n <= 0) return;
  const long threads = std::clamp<long>(workers, 1, n);
  if (threads == 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (long w = 0; w < threads; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace airybeta
