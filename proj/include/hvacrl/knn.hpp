#pragma once

#include <span>
#include <vector>

#include "hvacrl/features.hpp"
#include "hvacrl/historical_log.hpp"

namespace hvacrl {

struct KnnConfig {
  int k = 50;
  double tau = 0.05;
  std::vector<double> weights;  // empty means 1 for every feature

  /// Throws ConfigError unless 0 < tau <= 1/4, k >= 1 and weights are
  /// non-negative with the feature dimension.
  void validate() const;
};

/// sqrt(sum_q w_q (a_q - b_q)^2). Throws ConfigError on length mismatch.
double weighted_distance(std::span<const double> a, std::span<const double> b, std::span<const double> weights);

/// Normalised demonstration states with the actions taken in them.
class KnnDataset {
 public:
  KnnDataset() = default;
  KnnDataset(FeatureScaler scaler, std::vector<RawFeatures> features, std::vector<JointAction::Levels> actions);

  /// Fits the scaler on the log itself.
  static KnnDataset from_log(const HistoricalLog& log);
  static KnnDataset from_demonstrations(std::span<const Demonstration> demos);

  std::size_t size() const noexcept { return features_.size(); }
  bool empty() const noexcept { return features_.empty(); }
  const FeatureScaler& scaler() const noexcept { return scaler_; }
  const std::vector<RawFeatures>& features() const noexcept { return features_; }
  const std::vector<JointAction::Levels>& actions() const noexcept { return actions_; }

 private:
  FeatureScaler scaler_;
  std::vector<RawFeatures> features_;
  std::vector<JointAction::Levels> actions_;
};

struct Neighbor {
  std::size_t row = 0;
  double distance = 0.0;
};

/// The k nearest rows, nearest first; equal distances keep dataset order.
std::vector<Neighbor> knn_neighbors(const KnnDataset& data, std::span<const double> query, const KnnConfig& config);

/// Levels whose frequency among the k neighbours reaches tau, per zone.
FeasibleSets knn_feasible_sets(const KnnDataset& data, std::span<const double> query, const KnnConfig& config);

/// Convenience: normalise `state` with the dataset's scaler first.
FeasibleSets knn_feasible_sets(const KnnDataset& data, const BuildingState& state, const KnnConfig& config);

}  // namespace hvacrl
