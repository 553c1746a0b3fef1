#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gausscov {

/// Worker count from GAUSSCOV_THREADS, else 1.
inline int default_threads() {
  if (const char* env = std::getenv("GAUSSCOV_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers.
/// Each index is processed exactly once; callers write results into slot i
/// so output never depends on scheduling. The first exception is rethrown.
template <class Body>
void parallel_for(long count, int threads, Body&& body) {
  if (count <= 0) return;
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::min<long>(count, 1L << 20))));
  if (threads == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gausscov
