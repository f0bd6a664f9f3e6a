#include "hvacrl/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hvacrl/errors.hpp"

namespace hvacrl {

RawFeatures raw_features(const BuildingState& state) {
  RawFeatures f{};
  std::size_t q = 0;
  for (double t : state.zone_temps_C) f[q++] = t;
  for (int n : state.occupancy) f[q++] = n;
  f[q++] = state.outdoor_temp_C;
  for (int j = 0; j < kZones; ++j) f[q++] = state.prev_action.level(j) / 3.0;
  const double angle = 2.0 * std::numbers::pi * (kDayStartMinute + state.clock_min) / 1440.0;
  f[q++] = std::sin(angle);
  f[q++] = std::cos(angle);
  return f;
}

FeatureScaler::FeatureScaler() { hi_.fill(1.0); }

FeatureScaler::FeatureScaler(const RawFeatures& lo, const RawFeatures& hi) : lo_(lo), hi_(hi) {
  for (std::size_t q = 0; q < lo.size(); ++q) {
    if (!std::isfinite(lo[q]) || !std::isfinite(hi[q]) || hi[q] < lo[q]) {
      throw ConfigError("feature bounds invalid at index " + std::to_string(q));
    }
  }
}

FeatureScaler FeatureScaler::fit(std::span<const RawFeatures> rows) {
  if (rows.empty()) throw DataError("cannot fit feature bounds on an empty dataset", 0, "");
  RawFeatures lo = rows.front();
  RawFeatures hi = rows.front();
  for (const auto& r : rows) {
    for (std::size_t q = 0; q < r.size(); ++q) {
      lo[q] = std::min(lo[q], r[q]);
      hi[q] = std::max(hi[q], r[q]);
    }
  }
  return FeatureScaler(lo, hi);
}

FeatureScaler FeatureScaler::for_scenario(const Scenario& scenario) {
  RawFeatures lo{};
  RawFeatures hi{};
  std::size_t q = 0;
  for (int j = 0; j < kZones; ++j, ++q) {
    lo[q] = 18.0;
    hi[q] = 34.0;
  }
  for (int j = 0; j < kZones; ++j, ++q) {
    lo[q] = 0.0;
    hi[q] = std::max(1, scenario.occupancy.roster[static_cast<std::size_t>(j)]);
  }
  const auto& o = scenario.outdoor;
  lo[q] = o.base_C - o.amplitude_C - 3.0 * o.day_offset_sd_C;
  hi[q] = o.base_C + o.amplitude_C + 3.0 * o.day_offset_sd_C;
  ++q;
  for (int j = 0; j < kZones; ++j, ++q) hi[q] = 1.0;
  for (; q < lo.size(); ++q) {
    lo[q] = -1.0;
    hi[q] = 1.0;
  }
  return FeatureScaler(lo, hi);
}

RawFeatures FeatureScaler::apply(const RawFeatures& raw) const {
  RawFeatures out{};
  for (std::size_t q = 0; q < raw.size(); ++q) {
    const double range = hi_[q] - lo_[q];
    out[q] = range > 0.0 ? (raw[q] - lo_[q]) / range : 0.0;
  }
  return out;
}

}  // namespace hvacrl
