#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "margin/types.hpp"

namespace margin {

/// Caps the number of worker threads used by parallel_for. 0 restores the
/// hardware default; 1 forces serial execution.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(i) for every i in [begin, end) using static contiguous chunks.
/// Bodies must only write state owned by their own index; no reductions are
/// performed here, so results do not depend on the thread count.
template <class Body>
void parallel_for(Index begin, Index end, Body&& body) {
  const Index count = end - begin;
  if (count <= 0) return;
  const auto workers = static_cast<Index>(std::min<unsigned>(thread_count(), 64));
  if (workers <= 1 || count < 2) {
    for (Index i = begin; i < end; ++i) body(i);
    return;
  }
  const Index chunks = std::min(workers, count);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(chunks));
  for (Index c = 0; c < chunks; ++c) {
    const Index lo = begin + count * c / chunks;
    const Index hi = begin + count * (c + 1) / chunks;
    pool.emplace_back([&, lo, hi] {
      try {
        for (Index i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace margin
