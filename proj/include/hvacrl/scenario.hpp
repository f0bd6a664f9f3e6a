#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "hvacrl/action.hpp"
#include "hvacrl/comfort.hpp"
#include "hvacrl/hvac_equipment.hpp"
#include "hvacrl/hydraulic_network.hpp"
#include "hvacrl/thermal_zone.hpp"

namespace hvacrl {

/// Per-person day plan: arrival, lunch break, departure (minutes after 09:00).
struct OccupancyParams {
  std::array<int, kZones> roster{2, 2, 2, 2, 4, 4, 4};
  double attendance_prob = 0.85;
  double arrival_mean_min = 25.0;
  double arrival_sd_min = 20.0;
  double lunch_start_mean_min = 185.0;
  double lunch_start_sd_min = 10.0;
  double lunch_duration_mean_min = 85.0;
  double lunch_duration_sd_min = 15.0;
  double departure_mean_min = 545.0;
  double departure_sd_min = 20.0;
};

/// Sinusoidal daily profile; each day draws a Gaussian offset.
struct OutdoorParams {
  double base_C = 28.0;
  double amplitude_C = 4.0;
  double peak_hour = 15.0;
  double day_offset_sd_C = 1.5;
};

/// Occupancy-reactive rule used for demonstrations and the rule baseline.
struct RuleParams {
  double warm_C = 25.5;
  double hot_C = 26.5;
  int crowd = 4;
  double noise_prob = 0.1;
};

struct Scenario {
  std::uint64_t seed = 0;
  std::vector<ZoneParams> zones;
  std::vector<FcuParams> fcus;
  PumpParams pump;
  NetworkConfig network;
  OccupancyParams occupancy;
  OutdoorParams outdoor;
  RuleParams rule;
  ComfortParams comfort;
  AirProperties air;
  double chilled_supply_C = 7.0;
  int episode_steps = 120;
  int control_interval_min = 5;
  double substep_s = 60.0;
  double lambda_P = 3.0;
  double initial_temp_mean_C = 27.0;
  double initial_temp_spread_C = 1.0;
  double solver_tol_kPa = 1e-3;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
  double design_water_flow() const;
};

Scenario default_scenario();

nlohmann::json to_json(const Scenario& scenario);

/// Throws ConfigError naming the first key of `patch` that `reference` lacks.
/// Arrays of objects are checked element-wise against the reference's first
/// element.
void reject_unknown_keys(const nlohmann::json& reference, const nlohmann::json& patch, const std::string& path = "");

/// Overlays `patch` on the defaults. Keys absent from the default document
/// are rejected so typos fail loudly.
Scenario scenario_from_json(const nlohmann::json& patch);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace hvacrl
