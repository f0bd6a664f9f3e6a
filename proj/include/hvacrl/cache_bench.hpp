#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hvacrl/evaluate.hpp"
#include "hvacrl/mask_source.hpp"

namespace hvacrl {

struct LatencyStats {
  int steps = 0;
  double total_ms = 0.0;
  double mean_ms = 0.0;
  double max_ms = 0.0;
  double min_ms = 0.0;
  double episode_reward = 0.0;
  double hit_rate_pct = 0.0;  // cached arm only
  std::vector<double> step_ms;
};

struct CacheBenchResult {
  LatencyStats uncached;
  LatencyStats cached;
  std::size_t cache_entries = 0;
  std::int64_t warm_misses = 0;
};

/// One episode asking `provider` every step, then the same episode through a
/// cache that was first warmed by running `controller` on `warm_seeds`.
/// Latency covers producing the step's joint mask. The controller's random
/// stream is reseeded per episode, so a warm seed equal to `bench_seed`
/// replays the benchmark day.
CacheBenchResult run_cache_bench(const Scenario& scenario, std::shared_ptr<MaskSource> provider,
                                 const CacheKeyConfig& keys, const Policy& controller, std::uint64_t bench_seed,
                                 const std::vector<std::uint64_t>& warm_seeds);

}  // namespace hvacrl
