#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace stablab {

/// --jobs value, else STABLAB_JOBS, else 1.
inline int resolve_jobs(std::optional<int> requested) {
  if (requested && *requested >= 1) return *requested;
  if (const char* env = std::getenv("STABLAB_JOBS")) {
    try {
      int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// Runs fn(k) for k in [0, count) on up to `jobs` threads. Results must be written to
/// slot k only, so the outcome is independent of scheduling. Rethrows the first failure.
template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  if (count <= 0) return;
  jobs = std::clamp(jobs, 1, count);
  if (jobs == 1) {
    for (int k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace stablab
