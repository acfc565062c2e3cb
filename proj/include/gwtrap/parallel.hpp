// SPDX-License-Identifier: Apache-2.0
//
// Deterministic block-parallel map. Work is cut into fixed-size blocks, each
// block draws from its own RNG stream, and per-block results come back in
// block order, so the merged output does not depend on the worker count.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gwtrap {

/// 0 means "one per hardware thread".
inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

struct BlockRange {
  std::uint64_t index;
  std::uint64_t begin;
  std::uint64_t end;
};

/// Calls fn(BlockRange) for each block of [0, n) and returns the results
/// indexed by block. The first exception thrown by any block is rethrown.
template <class Fn>
auto map_blocks(std::uint64_t n, std::uint64_t block_size, unsigned workers, Fn fn)
    -> std::vector<decltype(fn(BlockRange{}))> {
  using R = decltype(fn(BlockRange{}));
  if (block_size == 0) block_size = 1;
  const std::uint64_t blocks = (n + block_size - 1) / block_size;
  std::vector<R> out(blocks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        const std::uint64_t begin = b * block_size;
        out[b] = fn(BlockRange{b, begin, std::min(n, begin + block_size)});
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
      }
    }
  };
  const unsigned w = static_cast<unsigned>(
      std::min<std::uint64_t>(resolve_workers(workers), std::max<std::uint64_t>(blocks, 1)));
  if (w <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned i = 0; i < w; ++i) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace gwtrap
