#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sparselab {

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Work is handed
/// out in blocks; callers write results by index so output is schedule-free.
/// The first exception thrown by any task is rethrown.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn, std::size_t block = 16) {
  threads = std::max(1u, threads);
  if (threads == 1 || count <= block) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t start = next.fetch_add(block);
      if (start >= count) return;
      const std::size_t stop = std::min(count, start + block);
      try {
        for (std::size_t i = start; i < stop; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, (count + block - 1) / block));
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace sparselab
