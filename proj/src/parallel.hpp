#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace compstat::detail {

// Runs body(i) for i in [0, count) across up to `threads` workers. Each index
// must write only its own output slot, so results are independent of the
// schedule. The first exception is rethrown after all workers stop.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, const Body& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  const std::size_t worker_count = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(worker_count);
  for (std::size_t w = 0; w < worker_count; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace compstat::detail
