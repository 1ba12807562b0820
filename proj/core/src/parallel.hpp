#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace midword::detail {

inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls fn(chunk, begin, end) for every fixed-size chunk of [0, n). Chunk
// boundaries depend only on n and chunk_size, so per-chunk partial results
// reduced in chunk order are identical for any worker count.
template <typename F>
void for_each_chunk(std::size_t n, std::size_t chunk_size, unsigned workers, F&& fn) {
  if (n == 0) return;
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), chunks));
  auto run = [&](std::size_t c) {
    fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
  };
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t c = t; c < chunks; c += threads) {
        try {
          run(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// One task per index.
template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& fn) {
  for_each_chunk(n, 1, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace midword::detail
