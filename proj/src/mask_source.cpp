#include "hvacrl/mask_source.hpp"

#include <cmath>
#include <iostream>
#include <mutex>

#include "hvacrl/errors.hpp"
#include "hvacrl/prompt.hpp"

namespace hvacrl {

StateWindow constant_window(const BuildingState& state) {
  StateWindow w;
  w.fill(state);
  return w;
}

KnnMaskSource::KnnMaskSource(std::shared_ptr<const KnnDataset> data, KnnConfig config)
    : data_(std::move(data)), config_(std::move(config)) {
  if (!data_ || data_->empty()) throw DataError("kNN mask source needs a non-empty dataset", 0, "");
  config_.validate();
  if (static_cast<std::size_t>(config_.k) > data_->size()) {
    throw ConfigError("knn k = " + std::to_string(config_.k) + " exceeds dataset size " + std::to_string(data_->size()));
  }
}

FeasibleSets KnnMaskSource::feasible_sets(const StateWindow& window) { return sets_for(window.back()); }

FeasibleSets KnnMaskSource::sets_for(const BuildingState& state) const {
  return knn_feasible_sets(*data_, state, config_);
}

PromptedMaskSource::PromptedMaskSource(CompletionFn complete) : complete_(std::move(complete)) {
  if (!complete_) throw ConfigError("prompted mask source needs a completion function");
}

FeasibleSets PromptedMaskSource::feasible_sets(const StateWindow& window) {
  const std::string reply = complete_(serialize_prompt(window));
  std::vector<std::string> warnings;
  const FeasibleSets sets = parse_recommendations_or_full(reply, &warnings);
  if (!warnings.empty()) {
    fallbacks_ += static_cast<std::int64_t>(warnings.size());
    last_warning_ = warnings.back();
    for (const auto& w : warnings) std::clog << "warning: recommendation fallback: " << w << "\n";
  }
  return sets;
}

std::size_t CacheKeyHash::operator()(const CacheKey& key) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::int64_t v) {
    h ^= static_cast<std::uint64_t>(v);
    h *= 1099511628211ULL;
  };
  for (auto t : key.temp) mix(t);
  mix(key.outdoor);
  for (auto o : key.occupancy) mix(o);
  mix(key.prev_action);
  mix(key.clock_bucket);
  return static_cast<std::size_t>(h);
}

CacheKey cache_key(const BuildingState& state, const CacheKeyConfig& config) {
  CacheKey key;
  for (std::size_t j = 0; j < static_cast<std::size_t>(kZones); ++j) {
    key.temp[j] = static_cast<std::int32_t>(std::floor(state.zone_temps_C[j] / config.temp_step_C));
    key.occupancy[j] = state.occupancy[j];
  }
  key.outdoor = static_cast<std::int32_t>(std::floor(state.outdoor_temp_C / config.outdoor_step_C));
  key.prev_action = state.prev_action.index();
  key.clock_bucket = state.clock_min / config.clock_bucket_min;
  return key;
}

BuildingState bucket_representative(const CacheKey& key, const CacheKeyConfig& config) {
  BuildingState s;
  for (std::size_t j = 0; j < static_cast<std::size_t>(kZones); ++j) {
    s.zone_temps_C[j] = (key.temp[j] + 0.5) * config.temp_step_C;
    s.occupancy[j] = key.occupancy[j];
  }
  s.outdoor_temp_C = (key.outdoor + 0.5) * config.outdoor_step_C;
  s.prev_action = JointAction::from_index(key.prev_action);
  s.clock_min = key.clock_bucket * config.clock_bucket_min + config.clock_bucket_min / 2;
  return s;
}

CachedMaskSource::CachedMaskSource(std::shared_ptr<MaskSource> inner, CacheKeyConfig config)
    : inner_(std::move(inner)), config_(config) {
  if (!inner_) throw ConfigError("cache needs an inner mask source");
  if (!(config_.temp_step_C > 0.0) || !(config_.outdoor_step_C > 0.0) || config_.clock_bucket_min <= 0) {
    throw ConfigError("cache discretisation steps must be positive");
  }
}

FeasibleSets CachedMaskSource::feasible_sets(const StateWindow& window) { return lookup(window.back()); }

FeasibleSets CachedMaskSource::lookup(const BuildingState& state) {
  const CacheKey key = cache_key(state, config_);
  {
    std::shared_lock lock(mutex_);
    const auto it = table_.find(key);
    if (it != table_.end()) {
      ++hits_;
      return it->second;
    }
  }
  ++misses_;
  const FeasibleSets sets = inner_->feasible_sets(constant_window(bucket_representative(key, config_)));
  std::unique_lock lock(mutex_);
  return table_.emplace(key, sets).first->second;
}

double CachedMaskSource::hit_rate() const noexcept {
  const auto total = hits_.load() + misses_.load();
  return total > 0 ? static_cast<double>(hits_.load()) / static_cast<double>(total) : 0.0;
}

std::size_t CachedMaskSource::size() const {
  std::shared_lock lock(mutex_);
  return table_.size();
}

void CachedMaskSource::reset_counters() noexcept {
  hits_ = 0;
  misses_ = 0;
}

}  // namespace hvacrl
