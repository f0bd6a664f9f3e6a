#pragma once

#include <array>
#include <span>
#include <vector>

#include "hvacrl/environment.hpp"

namespace hvacrl {

/// Layout: 7 zone temps, 7 occupancies, outdoor temp, 7 previous levels / 3,
/// sin and cos of the time of day.
inline constexpr int kFeatureDim = 3 * kZones + 3;

using RawFeatures = std::array<double, kFeatureDim>;

RawFeatures raw_features(const BuildingState& state);

/// Per-feature min-max normalisation. A feature with zero range maps to 0.
class FeatureScaler {
 public:
  FeatureScaler();
  FeatureScaler(const RawFeatures& lo, const RawFeatures& hi);

  /// Bounds taken from the data.
  static FeatureScaler fit(std::span<const RawFeatures> rows);
  /// Bounds implied by the scenario, so a learner needs no data to start.
  static FeatureScaler for_scenario(const Scenario& scenario);

  RawFeatures apply(const RawFeatures& raw) const;
  RawFeatures apply(const BuildingState& state) const { return apply(raw_features(state)); }

  const RawFeatures& lo() const noexcept { return lo_; }
  const RawFeatures& hi() const noexcept { return hi_; }

 private:
  RawFeatures lo_{};
  RawFeatures hi_{};
};

}  // namespace hvacrl
