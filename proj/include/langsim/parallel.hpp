#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace langsim {

// Runs fn(i) for i in [0, n) over `workers` threads (0: hardware count).
// Work is claimed dynamically; callers write results by index, so output
// does not depend on scheduling. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = 0) {
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  auto next = std::atomic<std::size_t>{0};
  auto failed = std::atomic<bool>{false};
  auto error = std::exception_ptr{};
  auto error_mutex = std::mutex{};
  auto body = [&] {
    for (auto i = next++; i < n && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        auto lock = std::lock_guard{error_mutex};
        if (!error) {
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  auto pool = std::vector<std::thread>{};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back(body);
  }
  for (auto& t : pool) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace langsim
