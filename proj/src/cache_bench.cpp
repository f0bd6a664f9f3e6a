#include "hvacrl/cache_bench.hpp"

#include <algorithm>
#include <chrono>

namespace hvacrl {

namespace {

LatencyStats run_episode(const Scenario& scenario, MaskSource& source, const Policy& controller,
                         std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  Environment env(scenario);
  env.reset(seed);
  auto rng = make_rng(seed, 20);
  LatencyStats stats;
  while (!env.done()) {
    const auto t0 = clock::now();
    const ActionMask mask = joint_mask(source.feasible_sets(env.prompt_window()));
    const auto t1 = clock::now();
    stats.step_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    const JointAction action = controller(env.state(), mask, rng);
    stats.episode_reward += env.step(action).reward;
  }
  stats.steps = static_cast<int>(stats.step_ms.size());
  if (stats.steps > 0) {
    for (double ms : stats.step_ms) stats.total_ms += ms;
    stats.mean_ms = stats.total_ms / stats.steps;
    stats.max_ms = *std::max_element(stats.step_ms.begin(), stats.step_ms.end());
    stats.min_ms = *std::min_element(stats.step_ms.begin(), stats.step_ms.end());
  }
  return stats;
}

}  // namespace

CacheBenchResult run_cache_bench(const Scenario& scenario, std::shared_ptr<MaskSource> provider,
                                 const CacheKeyConfig& keys, const Policy& controller, std::uint64_t bench_seed,
                                 const std::vector<std::uint64_t>& warm_seeds) {
  CacheBenchResult result;
  result.uncached = run_episode(scenario, *provider, controller, bench_seed);

  CachedMaskSource cache(provider, keys);
  for (std::uint64_t seed : warm_seeds) run_episode(scenario, cache, controller, seed);
  result.warm_misses = cache.misses();
  cache.reset_counters();
  result.cached = run_episode(scenario, cache, controller, bench_seed);
  result.cached.hit_rate_pct = cache.hit_rate() * 100.0;
  result.cache_entries = cache.size();
  return result;
}

}  // namespace hvacrl
