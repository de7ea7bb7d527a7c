#pragma once

// Replicate farm: a fixed pool of std::threads pulls replicate indices from an
// atomic counter and writes each result into its own slot, so the output does
// not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "probit_mix/couplings.hpp"
#include "probit_mix/random.hpp"

namespace probit_mix {

inline std::size_t default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls fn(index) for index in [0, count) on up to `threads` workers and
/// returns the results in index order. The first exception is rethrown.
template <class Fn>
auto run_replicates(std::size_t count, std::size_t threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> results(count);
  threads = std::max<std::size_t>(1, std::min(threads == 0 ? default_thread_count() : threads, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

/// N independent meeting times, replicate r seeded by derive_seed(master_seed, r).
inline std::vector<MeetingRecord> sample_meeting_times(Kernel kernel, const ProbitModel& model,
                                                       const PosteriorCache& cache, const CouplingConfig& cfg,
                                                       const RwmConfig& rwm, std::size_t replicates,
                                                       std::uint64_t master_seed, std::size_t threads = 0) {
  return run_replicates(replicates, threads, [&](std::size_t r) {
    return sample_meeting_time(kernel, model, cache, cfg, rwm, derive_seed(master_seed, r));
  });
}

}  // namespace probit_mix
