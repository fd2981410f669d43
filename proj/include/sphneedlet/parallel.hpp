#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace sphneedlet {

/// Worker count: SPHNEEDLET_THREADS if set, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("SPHNEEDLET_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(begin, end, chunk) over [0, n) split into contiguous chunks, one per worker.
/// The partition depends only on n and the worker count, so per-chunk reductions are reproducible.
template <typename Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t c = 0; c < workers; ++c) {
      const std::size_t begin = n * c / workers;
      const std::size_t end = n * (c + 1) / workers;
      pool.emplace_back([&fn, &errors, begin, end, c] {
        try {
          fn(begin, end, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::size_t chunk_count(std::size_t n) {
  return std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
}

}  // namespace sphneedlet
