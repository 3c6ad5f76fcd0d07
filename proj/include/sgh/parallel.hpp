#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace sgh {

/// Splits [0, count) into `threads` contiguous chunks and runs
/// fn(begin, end) on each. Chunk boundaries depend only on count and thread
/// count, so per-chunk work is reproducible.
template <class Fn>
void parallel_chunks(std::size_t count, int threads, Fn&& fn) {
  const std::size_t t = std::max<std::size_t>(1, std::min<std::size_t>(threads < 1 ? 1 : threads, count));
  if (t == 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(t - 1);
  const std::size_t step = (count + t - 1) / t;
  for (std::size_t c = 1; c < t; ++c) {
    const std::size_t b = std::min(count, c * step), e = std::min(count, (c + 1) * step);
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::size_t{0}, std::min(count, step));
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  parallel_chunks(count, threads, [&fn](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace sgh
