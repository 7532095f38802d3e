#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mtg {

// Splits [0, n) into `workers` contiguous shards and runs
// fn(worker_index, begin, end) on each, worker 0 inline when single-threaded.
// Shard boundaries depend only on (n, workers), so any per-shard accumulation
// that is later combined in worker order is reproducible for a fixed worker
// count. Exceptions from workers are rethrown on the calling thread.
inline void parallel_shards(int64_t n, int workers,
                            const std::function<void(int, int64_t, int64_t)>& fn) {
  if (workers < 1) workers = 1;
  if (workers > n && n > 0) workers = int(n);
  if (n <= 0) return;
  int64_t base = n / workers, extra = n % workers;
  std::vector<std::pair<int64_t, int64_t>> ranges;
  int64_t at = 0;
  for (int w = 0; w < workers; ++w) {
    int64_t len = base + (w < extra ? 1 : 0);
    ranges.emplace_back(at, at + len);
    at += len;
  }
  if (workers == 1) {
    fn(0, ranges[0].first, ranges[0].second);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  std::vector<std::thread> threads;
  for (int w = 1; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        fn(w, ranges[size_t(w)].first, ranges[size_t(w)].second);
      } catch (...) {
        errors[size_t(w)] = std::current_exception();
      }
    });
  }
  try {
    fn(0, ranges[0].first, ranges[0].second);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Runs fn(job) for job in [0, n) on up to `workers` threads, pulling jobs from
// a shared counter. Jobs must not depend on scheduling order.
inline void parallel_jobs(int n, int workers, const std::function<void(int)>& fn) {
  if (workers < 1) workers = 1;
  if (workers > n) workers = n;
  if (n <= 0) return;
  if (workers == 1) {
    for (int j = 0; j < n; ++j) fn(j);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  auto body = [&](int w) {
    try {
      for (;;) {
        int j = next.fetch_add(1);
        if (j >= n) break;
        fn(j);
      }
    } catch (...) {
      errors[size_t(w)] = std::current_exception();
    }
  };
  std::vector<std::thread> threads;
  for (int w = 1; w < workers; ++w) threads.emplace_back(body, w);
  body(0);
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mtg
