#include "hvacrl/environment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "hvacrl/errors.hpp"

namespace hvacrl {

namespace {

enum RngStream : std::uint64_t { kOccupancyStream = 1, kWeatherStream = 2, kInitialStream = 3 };

}  // namespace

int BuildingState::occupants_total() const noexcept {
  int n = 0;
  for (int o : occupancy) n += o;
  return n;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x68766163U};
  return std::mt19937_64(seq);
}

OccupancySeries occupancy_schedule(const Scenario& scenario, std::uint64_t seed) {
  const auto& p = scenario.occupancy;
  auto rng = make_rng(seed, kOccupancyStream);
  std::bernoulli_distribution attends(p.attendance_prob);
  std::normal_distribution<double> arrival(p.arrival_mean_min, p.arrival_sd_min);
  std::normal_distribution<double> lunch_start(p.lunch_start_mean_min, p.lunch_start_sd_min);
  std::normal_distribution<double> lunch_len(p.lunch_duration_mean_min, p.lunch_duration_sd_min);
  std::normal_distribution<double> departure(p.departure_mean_min, p.departure_sd_min);

  const int steps = scenario.episode_steps;
  OccupancySeries series(static_cast<std::size_t>(steps) + 1);
  for (std::size_t zone = 0; zone < static_cast<std::size_t>(kZones); ++zone) {
    for (int person = 0; person < p.roster[zone]; ++person) {
      // draw every variate so the stream layout does not depend on attendance
      const bool present = attends(rng);
      const double arrive = arrival(rng);
      const double out = lunch_start(rng);
      const double back = out + std::max(20.0, lunch_len(rng));
      const double leave = std::max(arrive + 60.0, departure(rng));
      if (!present) continue;
      for (int t = 0; t <= steps; ++t) {
        const double minute = t * scenario.control_interval_min;
        const bool in = minute >= arrive && minute < leave && !(minute >= out && minute < back);
        if (in) ++series[static_cast<std::size_t>(t)][zone];
      }
    }
  }
  return series;
}

double outdoor_temperature(const Scenario& scenario, double day_offset_C, int clock_min) {
  const double hour = (kDayStartMinute + clock_min) / 60.0;
  const auto& o = scenario.outdoor;
  return o.base_C + day_offset_C + o.amplitude_C * std::cos(2.0 * std::numbers::pi * (hour - o.peak_hour) / 24.0);
}

int rule_level(double zone_temp_C, int occupants, const RuleParams& rule) {
  if (occupants <= 0) return 0;
  int level = zone_temp_C >= rule.hot_C ? 3 : zone_temp_C >= rule.warm_C ? 2 : 1;
  if (occupants >= rule.crowd && level < 3) ++level;
  return level;
}

JointAction rule_action(const BuildingState& state, const RuleParams& rule) {
  JointAction::Levels levels{};
  for (std::size_t j = 0; j < static_cast<std::size_t>(kZones); ++j) {
    levels[j] = static_cast<std::uint8_t>(rule_level(state.zone_temps_C[j], state.occupancy[j], rule));
  }
  return JointAction(levels);
}

JointAction noisy_rule_action(const BuildingState& state, const RuleParams& rule, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  JointAction::Levels levels = rule_action(state, rule).levels();
  for (auto& l : levels) {
    const double x = u(rng);
    int level = l;
    if (x < 0.5 * rule.noise_prob) {
      --level;
    } else if (x < rule.noise_prob) {
      ++level;
    }
    l = static_cast<std::uint8_t>(std::clamp(level, 0, kFanLevels - 1));
  }
  return JointAction(levels);
}

Environment::Environment(Scenario scenario)
    : scenario_((scenario.validate(), std::move(scenario))),
      topology_(build_network(scenario_.zones, scenario_.network)),
      solver_(topology_, scenario_.pump, scenario_.design_water_flow()) {
  solver_.static_pressure_kPa = scenario_.network.static_pressure_kPa;
}

BuildingState Environment::reset(std::uint64_t seed) {
  occupancy_ = occupancy_schedule(scenario_, seed);
  auto weather = make_rng(seed, kWeatherStream);
  day_offset_C_ = std::normal_distribution<double>(0.0, scenario_.outdoor.day_offset_sd_C)(weather);
  auto init = make_rng(seed, kInitialStream);
  std::uniform_real_distribution<double> spread(-scenario_.initial_temp_spread_C, scenario_.initial_temp_spread_C);

  BuildingState s;
  for (auto& t : s.zone_temps_C) t = scenario_.initial_temp_mean_C + spread(init);
  s.occupancy = occupancy_.front();
  s.clock_min = 0;
  s.outdoor_temp_C = outdoor_temperature(scenario_, day_offset_C_, 0);
  s.prev_action = JointAction::all_off();

  const double idle = pump_frequency_for(0, kZones, scenario_.pump);
  const auto sol = solver_.solve(idle, std::vector<bool>(kZones, false), scenario_.solver_tol_kPa);
  std::vector<CoilState> coils(kZones);
  const auto water = propagate_temperatures(topology_, sol, coils, scenario_.chilled_supply_C);
  s.aux = measure(sol, water, idle);

  history_.assign(1, s);
  return s;
}

AuxMeasurements Environment::measure(const HydraulicSolution& solution, const WaterTemperatures& water,
                                     double freq) const {
  AuxMeasurements aux;
  aux.supply_water_C = water.supply_C;
  aux.return_water_C = water.return_C;
  aux.pump_freq_Hz = freq;
  aux.pump_flow_m3_s = solution.pump_flow_m3_s;
  for (std::size_t i = 0; i < static_cast<std::size_t>(kZones); ++i) {
    const auto j = static_cast<std::size_t>(topology_.coil_branches()[i]);
    const auto& b = topology_.branches()[j];
    aux.fcu_supply_temp_C[i] = water.branch_inlet_C[j];
    aux.fcu_return_temp_C[i] = water.branch_outlet_C[j];
    aux.fcu_supply_pressure_kPa[i] = solution.node_pressures_kPa[static_cast<std::size_t>(b.upstream)];
    aux.fcu_return_pressure_kPa[i] = solution.node_pressures_kPa[static_cast<std::size_t>(b.downstream)];
  }
  return aux;
}

StepResult Environment::step(const JointAction& action) {
  if (history_.empty()) throw ConfigError("step() called before reset()");
  if (done()) throw ConfigError("step() called after the episode finished");
  const BuildingState& s = history_.back();
  const int t = step_index();
  const auto& levels = action.levels();

  int active = 0;
  std::vector<bool> valves(kZones, false);
  for (std::size_t i = 0; i < static_cast<std::size_t>(kZones); ++i) {
    valves[i] = levels[i] > 0;
    active += valves[i] ? 1 : 0;
  }
  const double freq = pump_frequency_for(active, kZones, scenario_.pump);

  StepResult result;
  try {
    result.info.hydraulics = solver_.solve(freq, valves, scenario_.solver_tol_kPa);
  } catch (const SolverError& e) {
    throw SolverError("step " + std::to_string(t) + ": " + e.what(), e.residual_kPa(), e.iterations());
  }
  const auto& sol = result.info.hydraulics;

  std::vector<CoilState> coils(kZones);
  for (std::size_t i = 0; i < static_cast<std::size_t>(kZones); ++i) {
    coils[i].effectiveness = scenario_.fcus[i].coil_effectiveness_by_mode[levels[i]];
    coils[i].t_air_C = s.zone_temps_C[i];
  }
  const auto water = propagate_temperatures(topology_, sol, coils, scenario_.chilled_supply_C);

  // supply air chosen so the air-side capacity matches the coil duty
  std::array<SupplyAir, kZones> supply{};
  for (std::size_t i = 0; i < static_cast<std::size_t>(kZones); ++i) {
    const auto branch = static_cast<std::size_t>(topology_.coil_branches()[i]);
    const double q_coil = water.coil_q_W[branch];
    result.info.coil_load_W[i] = q_coil;
    SupplyAir& air = supply[i];
    air.rho_kg_m3 = scenario_.air.rho_kg_m3;
    air.cp_J_kgK = scenario_.air.cp_J_kgK;
    air.vdot_m3_s = fcu_airflow(levels[i], scenario_.fcus[i]);
    air.t_supply_C = s.zone_temps_C[i];
    if (air.vdot_m3_s > 0.0) air.t_supply_C -= q_coil / (air.rho_kg_m3 * air.cp_J_kgK * air.vdot_m3_s);
  }

  std::array<double, kZones> temps = s.zone_temps_C;
  const int substeps = static_cast<int>(std::lround(scenario_.control_interval_min * 60.0 / scenario_.substep_s));
  std::map<int, double> by_id;
  for (int k = 0; k < substeps; ++k) {
    const int minute = s.clock_min + static_cast<int>(k * scenario_.substep_s / 60.0);
    const double t_out = outdoor_temperature(scenario_, day_offset_C_, minute);
    for (std::size_t i = 0; i < static_cast<std::size_t>(kZones); ++i) by_id[static_cast<int>(i) + 1] = temps[i];
    std::array<double, kZones> next{};
    for (std::size_t i = 0; i < static_cast<std::size_t>(kZones); ++i) {
      const auto& zone = scenario_.zones[i];
      const double q_load = occupant_heat(temps[i], s.occupancy[i], zone) + interzone_heat(temps[i], by_id, zone) +
                            envelope_load(zone, {t_out, temps[i]});
      const double q_sup = supply_capacity(supply[i], temps[i]);
      next[i] = zone_temperature_step(temps[i], q_load, q_sup, zone, scenario_.substep_s, scenario_.air);
    }
    temps = next;
  }

  // metrics over the interval's occupants, evaluated at the end-of-interval temperatures
  auto& info = result.info;
  double pmv_weighted = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(kZones); ++i) {
    info.zone_pmv[i] = pmv(std::clamp(temps[i], 10.0, 40.0), scenario_.comfort);
    info.zone_ppd[i] = ppd(info.zone_pmv[i]);
    pmv_weighted += s.occupancy[i] * std::abs(info.zone_pmv[i]);
    info.fan_power_kW += fcu_fan_power(levels[i], scenario_.fcus[i]) / 1000.0;
  }
  info.pump_power_kW = pump_power(freq, scenario_.pump) / 1000.0;
  auto& m = info.metrics;
  m.occupants_total = s.occupants_total();
  m.ppd_mean_pct = mean_ppd(info.zone_ppd, s.occupancy);
  m.pmv_abs_mean = m.occupants_total > 0 ? pmv_weighted / m.occupants_total : 0.0;
  m.power_kW = info.pump_power_kW + info.fan_power_kW;
  m.reward = step_reward(m.ppd_mean_pct, m.power_kW, m.occupants_total, scenario_.lambda_P);
  m.energy_penalty = scenario_.lambda_P * m.power_kW;
  m.comfort_penalty = m.occupants_total > 0 ? m.ppd_mean_pct : 0.0;

  BuildingState next;
  next.zone_temps_C = temps;
  next.clock_min = s.clock_min + scenario_.control_interval_min;
  next.occupancy = occupancy_[static_cast<std::size_t>(t + 1)];
  next.outdoor_temp_C = outdoor_temperature(scenario_, day_offset_C_, next.clock_min);
  next.prev_action = action;
  next.aux = measure(sol, water, freq);

  history_.push_back(next);
  result.next = next;
  result.reward = m.reward;
  result.done = done();
  return result;
}

std::array<BuildingState, kPromptWindow> Environment::prompt_window() const {
  std::array<BuildingState, kPromptWindow> window;
  const int current = step_index();
  for (int k = 0; k < kPromptWindow; ++k) {
    const int idx = std::max(0, current - (kPromptWindow - 1) + k);
    window[static_cast<std::size_t>(k)] = history_[static_cast<std::size_t>(idx)];
  }
  return window;
}

}  // namespace hvacrl
