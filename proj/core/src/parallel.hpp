#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wlanips::detail {

inline unsigned worker_count(unsigned requested, std::size_t jobs) {
  const unsigned n = requested != 0 ? requested : std::max(1U, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Runs fn(job, worker) for job in [0, jobs). Each job must write only its own
// slot so the result does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t jobs, unsigned threads, Fn&& fn) {
  const unsigned n = worker_count(threads, jobs);
  if (n <= 1) {
    for (std::size_t k = 0; k < jobs; ++k) fn(k, 0U);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k; (k = next.fetch_add(1)) < jobs;) fn(k, w);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace wlanips::detail
