#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mcsense {

/// Thread budget resolution: explicit argument > MC_SENSE_THREADS env var >
/// hardware concurrency. Zero or negative requests mean "decide for me".
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MC_SENSE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? int(hw) : 1;
}

/// Static block partition of [begin, end) over `threads` workers. The functor
/// receives each index exactly once; callers must make per-index work
/// independent so results do not depend on the partition. The first exception
/// thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for(long begin, long end, int threads, Fn&& fn) {
  const long total = end - begin;
  if (total <= 0) return;
  threads = int(std::max<long>(1, std::min<long>(threads, total)));
  if (threads == 1) {
    for (long k = begin; k < end; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(threads));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  const long chunk = (total + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long lo = begin + t * chunk;
    const long hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn, &errors, t] {
      try {
        for (long k = lo; k < hi; ++k) fn(k);
      } catch (...) {
        errors[std::size_t(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mcsense
