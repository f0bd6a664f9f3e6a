#pragma once

#include <array>
#include <atomic>
#include <functional>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "hvacrl/environment.hpp"
#include "hvacrl/knn.hpp"

namespace hvacrl {

/// The five most recent states, oldest first; the last one is current.
using StateWindow = std::array<BuildingState, kPromptWindow>;

/// A window holding `state` in every slot.
StateWindow constant_window(const BuildingState& state);

/// Produces per-zone feasible level sets for the current state.
class MaskSource {
 public:
  virtual ~MaskSource() = default;
  virtual FeasibleSets feasible_sets(const StateWindow& window) = 0;
  virtual std::string name() const = 0;
};

class FullMaskSource final : public MaskSource {
 public:
  FeasibleSets feasible_sets(const StateWindow&) override { return FeasibleSets::full(); }
  std::string name() const override { return "full"; }
};

/// Neighbourhood frequencies over a demonstration log. Read-only once built,
/// so one instance may serve several threads.
class KnnMaskSource final : public MaskSource {
 public:
  KnnMaskSource(std::shared_ptr<const KnnDataset> data, KnnConfig config);

  FeasibleSets feasible_sets(const StateWindow& window) override;
  FeasibleSets sets_for(const BuildingState& state) const;
  std::string name() const override { return "knn"; }
  const KnnDataset& dataset() const noexcept { return *data_; }
  const KnnConfig& config() const noexcept { return config_; }

 private:
  std::shared_ptr<const KnnDataset> data_;
  KnnConfig config_;
};

/// Prompt in, JSON recommendation text out.
using CompletionFn = std::function<std::string(const std::string& prompt)>;

/// Serialises the window, asks the completion function and parses its answer.
/// A zone whose recommendation is unusable falls back to the full level set; a
/// reply that cannot be parsed at all falls back to the full set everywhere.
class PromptedMaskSource final : public MaskSource {
 public:
  explicit PromptedMaskSource(CompletionFn complete);

  FeasibleSets feasible_sets(const StateWindow& window) override;
  std::string name() const override { return "prompted"; }
  std::int64_t fallbacks() const noexcept { return fallbacks_.load(); }
  const std::string& last_warning() const noexcept { return last_warning_; }

 private:
  CompletionFn complete_;
  std::atomic<std::int64_t> fallbacks_{0};
  std::string last_warning_;
};

struct CacheKeyConfig {
  double temp_step_C = 0.5;
  double outdoor_step_C = 1.0;
  int clock_bucket_min = 30;
};

/// Discretised state: temperatures and clock bucketed, occupancy and
/// previous levels exact.
struct CacheKey {
  std::array<std::int32_t, kZones> temp{};
  std::int32_t outdoor = 0;
  std::array<std::int32_t, kZones> occupancy{};
  std::int32_t prev_action = 0;
  std::int32_t clock_bucket = 0;

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& key) const noexcept;
};

CacheKey cache_key(const BuildingState& state, const CacheKeyConfig& config);
/// Bucket centres for temperatures, bucket start + half width for the clock.
BuildingState bucket_representative(const CacheKey& key, const CacheKeyConfig& config);

/// Memoises another source by discretised key. On a miss the inner source is
/// asked about the bucket representative (a constant window), so a cached
/// answer never depends on which state happened to populate the bucket.
/// Lookups take a shared lock; insertion takes it exclusively.
class CachedMaskSource final : public MaskSource {
 public:
  CachedMaskSource(std::shared_ptr<MaskSource> inner, CacheKeyConfig config = {});

  FeasibleSets feasible_sets(const StateWindow& window) override;
  FeasibleSets lookup(const BuildingState& state);
  std::string name() const override { return "cached-" + inner_->name(); }

  std::int64_t hits() const noexcept { return hits_.load(); }
  std::int64_t misses() const noexcept { return misses_.load(); }
  double hit_rate() const noexcept;
  std::size_t size() const;
  void reset_counters() noexcept;
  const CacheKeyConfig& config() const noexcept { return config_; }

 private:
  std::shared_ptr<MaskSource> inner_;
  CacheKeyConfig config_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<CacheKey, FeasibleSets, CacheKeyHash> table_;
  std::atomic<std::int64_t> hits_{0};
  std::atomic<std::int64_t> misses_{0};
};

}  // namespace hvacrl
