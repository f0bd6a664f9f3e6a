#include "hvacrl/knn.hpp"

#include <algorithm>
#include <cmath>

#include "hvacrl/errors.hpp"

namespace hvacrl {

void KnnConfig::validate() const {
  if (k < 1) throw ConfigError("knn k must be at least 1");
  if (!(tau > 0.0 && tau <= 0.25)) throw ConfigError("knn tau must lie in (0, 0.25]");
  if (!weights.empty() && weights.size() != static_cast<std::size_t>(kFeatureDim)) {
    throw ConfigError("knn weights need " + std::to_string(kFeatureDim) + " entries");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("knn weights must be finite and non-negative");
  }
}

double weighted_distance(std::span<const double> a, std::span<const double> b, std::span<const double> weights) {
  if (a.size() != b.size() || a.size() != weights.size()) {
    throw ConfigError("weighted_distance: length mismatch (" + std::to_string(a.size()) + ", " +
                      std::to_string(b.size()) + ", " + std::to_string(weights.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) {
    const double d = a[q] - b[q];
    sum += weights[q] * d * d;
  }
  return std::sqrt(sum);
}

KnnDataset::KnnDataset(FeatureScaler scaler, std::vector<RawFeatures> features,
                       std::vector<JointAction::Levels> actions)
    : scaler_(std::move(scaler)), features_(std::move(features)), actions_(std::move(actions)) {
  if (features_.size() != actions_.size()) throw ConfigError("knn dataset: feature and action counts differ");
}

KnnDataset KnnDataset::from_demonstrations(std::span<const Demonstration> demos) {
  if (demos.empty()) throw DataError("knn dataset needs at least one demonstration", 0, "");
  std::vector<RawFeatures> raw;
  raw.reserve(demos.size());
  for (const auto& d : demos) raw.push_back(raw_features(d.state));
  FeatureScaler scaler = FeatureScaler::fit(raw);
  std::vector<JointAction::Levels> actions;
  actions.reserve(demos.size());
  for (auto& r : raw) r = scaler.apply(r);
  for (const auto& d : demos) actions.push_back(d.action.levels());
  return KnnDataset(std::move(scaler), std::move(raw), std::move(actions));
}

KnnDataset KnnDataset::from_log(const HistoricalLog& log) {
  const auto demos = to_demonstrations(log);
  return from_demonstrations(demos);
}

std::vector<Neighbor> knn_neighbors(const KnnDataset& data, std::span<const double> query, const KnnConfig& config) {
  config.validate();
  if (data.empty()) throw DataError("knn query on an empty dataset", 0, "");
  if (static_cast<std::size_t>(config.k) > data.size()) {
    throw ConfigError("knn k = " + std::to_string(config.k) + " exceeds dataset size " + std::to_string(data.size()));
  }
  std::vector<double> ones;
  std::span<const double> w = config.weights;
  if (w.empty()) {
    ones.assign(static_cast<std::size_t>(kFeatureDim), 1.0);
    w = ones;
  }
  std::vector<Neighbor> all(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    all[i] = {i, weighted_distance(data.features()[i], query, w)};
  }
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.row < b.row);
  };
  const auto k = static_cast<std::ptrdiff_t>(config.k);
  std::partial_sort(all.begin(), all.begin() + k, all.end(), closer);
  all.resize(static_cast<std::size_t>(k));
  return all;
}

FeasibleSets knn_feasible_sets(const KnnDataset& data, std::span<const double> query, const KnnConfig& config) {
  const auto neighbors = knn_neighbors(data, query, config);
  std::array<std::array<int, kFanLevels>, kZones> counts{};
  for (const auto& n : neighbors) {
    const auto& levels = data.actions()[n.row];
    for (std::size_t j = 0; j < static_cast<std::size_t>(kZones); ++j) ++counts[j][levels[j]];
  }
  FeasibleSets sets;
  const double k = static_cast<double>(neighbors.size());
  for (std::size_t j = 0; j < static_cast<std::size_t>(kZones); ++j) {
    for (int l = 0; l < kFanLevels; ++l) {
      if (counts[j][static_cast<std::size_t>(l)] / k >= config.tau) sets.per_zone[j] |= static_cast<std::uint8_t>(1U << l);
    }
  }
  return sets;
}

FeasibleSets knn_feasible_sets(const KnnDataset& data, const BuildingState& state, const KnnConfig& config) {
  const RawFeatures q = data.scaler().apply(state);
  return knn_feasible_sets(data, q, config);
}

}  // namespace hvacrl
