#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace vssc {

// Worker count for untimed computation passes. VSSC_THREADS overrides when it
// parses as a positive integer; otherwise hardware concurrency, floored at 1.
inline int worker_count() {
  if (const char* env = std::getenv("VSSC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [begin, end) across `workers` threads. Items are
// claimed in chunks off a shared counter, and each item may touch only its
// own output slot, so the result is identical for any worker count. The first
// exception thrown by any item is rethrown on the calling thread.
inline void parallel_for(std::int64_t begin, std::int64_t end, int workers,
                         const std::function<void(std::int64_t)>& fn) {
  const std::int64_t span = end - begin;
  if (span <= 0) return;
  if (workers < 1) workers = 1;
  if (workers == 1 || span == 1) {
    for (std::int64_t i = begin; i < end; ++i) fn(i);
    return;
  }

  constexpr std::int64_t kChunk = 16;
  std::atomic<std::int64_t> next(begin);
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run = [&] {
    for (;;) {
      const std::int64_t lo = next.fetch_add(kChunk);
      if (lo >= end) return;
      const std::int64_t hi = std::min(lo + kChunk, end);
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(
      std::min<std::int64_t>(workers, (span + kChunk - 1) / kChunk));
  pool.reserve(spawn > 0 ? spawn - 1 : 0);
  for (int t = 1; t < spawn; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace vssc
