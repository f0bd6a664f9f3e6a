#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hvacrl/action.hpp"
#include "hvacrl/comfort.hpp"
#include "hvacrl/hydraulic_network.hpp"
#include "hvacrl/scenario.hpp"

namespace hvacrl {

inline constexpr int kPromptWindow = 5;
inline constexpr int kDayStartMinute = 9 * 60;

/// Water-side measurements reported with each state.
struct AuxMeasurements {
  double supply_water_C = 0.0;
  double return_water_C = 0.0;
  double pump_freq_Hz = 0.0;
  double pump_flow_m3_s = 0.0;
  std::array<double, kZones> fcu_supply_temp_C{};
  std::array<double, kZones> fcu_return_temp_C{};
  std::array<double, kZones> fcu_supply_pressure_kPa{};
  std::array<double, kZones> fcu_return_pressure_kPa{};
};

struct BuildingState {
  std::array<double, kZones> zone_temps_C{};
  std::array<int, kZones> occupancy{};
  double outdoor_temp_C = 0.0;
  JointAction prev_action;
  int clock_min = 0;  // minutes since 09:00
  AuxMeasurements aux;

  int occupants_total() const noexcept;
};

struct StepInfo {
  StepMetrics metrics;
  std::array<double, kZones> zone_pmv{};
  std::array<double, kZones> zone_ppd{};
  std::array<double, kZones> coil_load_W{};
  double pump_power_kW = 0.0;
  double fan_power_kW = 0.0;
  HydraulicSolution hydraulics;
};

struct StepResult {
  BuildingState next;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

using OccupancySeries = std::vector<std::array<int, kZones>>;

/// Seed-deterministic occupancy for steps 0..episode_steps (inclusive).
OccupancySeries occupancy_schedule(const Scenario& scenario, std::uint64_t seed);

double outdoor_temperature(const Scenario& scenario, double day_offset_C, int clock_min);

/// Fan level chosen by the occupancy-reactive rule for one zone.
int rule_level(double zone_temp_C, int occupants, const RuleParams& rule);

/// Rule levels for every zone of `state`.
JointAction rule_action(const BuildingState& state, const RuleParams& rule);

/// Rule action where each zone independently moves one level up or down
/// with probability rule.noise_prob (split evenly, clamped to the level range).
JointAction noisy_rule_action(const BuildingState& state, const RuleParams& rule, std::mt19937_64& rng);

/// Independent RNG stream for (seed, purpose).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

/// One simulated day: 120 five-minute control steps from 09:00.
/// Single-threaded; run independent instances for parallel rollouts.
class Environment {
 public:
  explicit Environment(Scenario scenario);

  const Scenario& scenario() const noexcept { return scenario_; }

  BuildingState reset(std::uint64_t seed);
  StepResult step(const JointAction& action);

  const BuildingState& state() const noexcept { return history_.back(); }
  const std::vector<BuildingState>& history() const noexcept { return history_; }
  int step_index() const noexcept { return static_cast<int>(history_.size()) - 1; }
  bool done() const noexcept { return step_index() >= scenario_.episode_steps; }

  /// The last five states ending at the current one; before step 4 the
  /// initial state is repeated to fill the window.
  std::array<BuildingState, kPromptWindow> prompt_window() const;

 private:
  AuxMeasurements measure(const HydraulicSolution& solution, const WaterTemperatures& water, double freq) const;

  Scenario scenario_;
  NetworkTopology topology_;
  HydraulicSolver solver_;
  OccupancySeries occupancy_;
  double day_offset_C_ = 0.0;
  std::vector<BuildingState> history_;
};

}  // namespace hvacrl
