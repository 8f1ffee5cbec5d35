#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gwspeed {

/// How a Monte Carlo job is split. Work is cut into tasks of a fixed size
/// that does not depend on the worker count; task i always draws from
/// derive_stream(seed, i) and results are merged in task order, so output is
/// identical for any number of workers.
struct Parallelism {
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Splits `total` units into tasks of at most `chunk` units.
inline std::vector<std::uint64_t> split_work(std::uint64_t total, std::uint64_t chunk) {
  std::vector<std::uint64_t> sizes;
  if (chunk == 0) chunk = 1;
  for (std::uint64_t done = 0; done < total; done += chunk) {
    sizes.push_back(std::min(chunk, total - done));
  }
  return sizes;
}

/// Runs fn(task_index) for every task on up to `workers` threads and
/// returns results in task order. The first exception thrown by any task is
/// rethrown after all threads stop.
template <class Fn>
auto run_tasks(std::size_t n_tasks, int workers, Fn fn) {
  using Result = decltype(fn(std::size_t{0}));
  std::vector<Result> results(n_tasks);
  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min<std::size_t>(n_tasks, static_cast<std::size_t>(std::max(1, workers))));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_tasks || failed.load()) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace gwspeed
