#include "hvacrl/scenario.hpp"

#include <cmath>
#include <fstream>

#include "hvacrl/errors.hpp"

namespace hvacrl {

using nlohmann::json;

namespace {

ZoneParams make_zone(int id, double volume, std::vector<WallSurface> walls) {
  ZoneParams z;
  z.zone_id = id;
  z.air_volume_m3 = volume;
  z.walls = std::move(walls);
  return z;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

void reject_unknown_keys(const json& reference, const json& patch, const std::string& path) {
  if (!patch.is_object() || !reference.is_object()) return;
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (!reference.contains(it.key())) throw ConfigError("unknown config key '" + path + it.key() + "'");
    const json& ref = reference.at(it.key());
    if (ref.is_object()) {
      reject_unknown_keys(ref, it.value(), path + it.key() + ".");
    } else if (ref.is_array() && it.value().is_array() && !ref.empty() && ref.front().is_object()) {
      for (const auto& item : it.value()) reject_unknown_keys(ref.front(), item, path + it.key() + "[].");
    }
  }
}

Scenario default_scenario() {
  Scenario s;
  const std::vector<WallSurface> office{{50.0, 1.2, 3.0}};
  const std::vector<WallSurface> hall{{40.0, 1.2, 3.0}, {30.0, 1.2, 3.0}};
  for (int id = 1; id <= 4; ++id) s.zones.push_back(make_zone(id, 300.0, office));
  for (int id = 5; id <= 7; ++id) s.zones.push_back(make_zone(id, 450.0, hall));
  const double eta = 120.0;
  s.zones[4].adjacency = {{6, eta}};
  s.zones[5].adjacency = {{5, eta}, {7, eta}};
  s.zones[6].adjacency = {{6, eta}};
  s.fcus.assign(kZones, FcuParams{});
  for (int j = 4; j < kZones; ++j) {
    s.fcus[static_cast<std::size_t>(j)].rated_airflow_m3_s = 0.3;
    s.fcus[static_cast<std::size_t>(j)].rated_fan_power_W = 180.0;
  }
  return s;
}

double Scenario::design_water_flow() const {
  double q = 0.0;
  for (const auto& f : fcus) q += f.rated_water_flow_m3_s;
  return q;
}

void Scenario::validate() const {
  if (zones.size() != static_cast<std::size_t>(kZones)) {
    throw ConfigError("scenario must define exactly " + std::to_string(kZones) + " zones");
  }
  if (fcus.size() != zones.size()) throw ConfigError("scenario needs one FCU per zone");
  for (std::size_t i = 0; i < zones.size(); ++i) {
    if (zones[i].zone_id != static_cast<int>(i) + 1) throw ConfigError("zone ids must be 1..7 in order");
  }
  validate_zones(zones);
  for (const auto& f : fcus) f.validate();
  pump.validate();
  comfort.validate();
  if (!(air.rho_kg_m3 > 0.0) || !(air.cp_J_kgK > 0.0)) throw ConfigError("air properties must be positive");
  if (episode_steps <= 0 || control_interval_min <= 0) throw ConfigError("episode length and interval must be positive");
  if (!(substep_s > 0.0) || std::fmod(control_interval_min * 60.0, substep_s) != 0.0) {
    throw ConfigError("sub-step must divide the control interval");
  }
  if (!(lambda_P > 0.0)) throw ConfigError("lambda_P must be positive");
  if (!(solver_tol_kPa > 0.0)) throw ConfigError("solver tolerance must be positive");
  for (int r : occupancy.roster) {
    if (r < 0) throw ConfigError("occupancy roster must be non-negative");
  }
  if (!(occupancy.attendance_prob >= 0.0 && occupancy.attendance_prob <= 1.0)) {
    throw ConfigError("attendance probability must lie in [0, 1]");
  }
  if (!(rule.noise_prob >= 0.0 && rule.noise_prob <= 1.0)) throw ConfigError("rule noise must lie in [0, 1]");
}

json to_json(const Scenario& s) {
  json zones = json::array();
  for (const auto& z : s.zones) {
    json walls = json::array();
    for (const auto& w : z.walls) {
      walls.push_back({{"area_m2", w.area_m2}, {"u_W_per_m2K", w.u_W_per_m2K}, {"solar_W_per_m2", w.solar_W_per_m2}});
    }
    json adj = json::array();
    for (const auto& a : z.adjacency) adj.push_back({{"zone_id", a.zone_id}, {"eta_W_per_K", a.eta_W_per_K}});
    zones.push_back({{"zone_id", z.zone_id},
                     {"air_volume_m3", z.air_volume_m3},
                     {"walls", walls},
                     {"adjacency", adj},
                     {"beta", z.beta},
                     {"q_p_W", z.q_p_W},
                     {"q_d_W", z.q_d_W}});
  }
  json fcus = json::array();
  for (const auto& f : s.fcus) {
    fcus.push_back({{"rated_airflow_m3_s", f.rated_airflow_m3_s},
                    {"rated_fan_power_W", f.rated_fan_power_W},
                    {"mode_airflow_fractions", f.mode_airflow_fractions},
                    {"rated_water_flow_m3_s", f.rated_water_flow_m3_s},
                    {"coil_effectiveness_by_mode", f.coil_effectiveness_by_mode}});
  }
  const auto& o = s.occupancy;
  return {
      {"seed", s.seed},
      {"zones", zones},
      {"fcus", fcus},
      {"pump",
       {{"alpha1", s.pump.alpha1},
        {"alpha2", s.pump.alpha2},
        {"alpha3", s.pump.alpha3},
        {"rated_freq_Hz", s.pump.rated_freq_Hz},
        {"rated_power_W", s.pump.rated_power_W},
        {"min_freq_Hz", s.pump.min_freq_Hz},
        {"max_freq_Hz", s.pump.max_freq_Hz}}},
      {"network",
       {{"supply_main_resistance", s.network.supply_main_resistance},
        {"return_main_resistance", s.network.return_main_resistance},
        {"coil_resistance", s.network.coil_resistance},
        {"bypass_resistance", s.network.bypass_resistance},
        {"static_pressure_kPa", s.network.static_pressure_kPa}}},
      {"occupancy",
       {{"roster", o.roster},
        {"attendance_prob", o.attendance_prob},
        {"arrival_mean_min", o.arrival_mean_min},
        {"arrival_sd_min", o.arrival_sd_min},
        {"lunch_start_mean_min", o.lunch_start_mean_min},
        {"lunch_start_sd_min", o.lunch_start_sd_min},
        {"lunch_duration_mean_min", o.lunch_duration_mean_min},
        {"lunch_duration_sd_min", o.lunch_duration_sd_min},
        {"departure_mean_min", o.departure_mean_min},
        {"departure_sd_min", o.departure_sd_min}}},
      {"outdoor",
       {{"base_C", s.outdoor.base_C},
        {"amplitude_C", s.outdoor.amplitude_C},
        {"peak_hour", s.outdoor.peak_hour},
        {"day_offset_sd_C", s.outdoor.day_offset_sd_C}}},
      {"rule",
       {{"warm_C", s.rule.warm_C}, {"hot_C", s.rule.hot_C}, {"crowd", s.rule.crowd}, {"noise_prob", s.rule.noise_prob}}},
      {"comfort",
       {{"air_velocity_m_s", s.comfort.air_velocity_m_s},
        {"relative_humidity_pct", s.comfort.relative_humidity_pct},
        {"clothing_clo", s.comfort.clothing_clo},
        {"metabolic_met", s.comfort.metabolic_met},
        {"mean_radiant_equals_air", s.comfort.mean_radiant_equals_air}}},
      {"air", {{"rho_kg_m3", s.air.rho_kg_m3}, {"cp_J_kgK", s.air.cp_J_kgK}}},
      {"chilled_supply_C", s.chilled_supply_C},
      {"episode_steps", s.episode_steps},
      {"control_interval_min", s.control_interval_min},
      {"substep_s", s.substep_s},
      {"lambda_P", s.lambda_P},
      {"initial_temp_mean_C", s.initial_temp_mean_C},
      {"initial_temp_spread_C", s.initial_temp_spread_C},
      {"solver_tol_kPa", s.solver_tol_kPa},
  };
}

Scenario scenario_from_json(const json& patch) {
  if (!patch.is_object()) throw ConfigError("scenario config must be a JSON object");
  const json reference = to_json(default_scenario());
  reject_unknown_keys(reference, patch, "");
  json j = reference;
  j.merge_patch(patch);

  Scenario s;
  read(j, "seed", s.seed);
  s.zones.clear();
  for (const auto& zj : j.at("zones")) {
    ZoneParams z;
    read(zj, "zone_id", z.zone_id);
    read(zj, "air_volume_m3", z.air_volume_m3);
    read(zj, "beta", z.beta);
    read(zj, "q_p_W", z.q_p_W);
    read(zj, "q_d_W", z.q_d_W);
    if (zj.contains("walls")) {
      for (const auto& wj : zj.at("walls")) {
        WallSurface w;
        read(wj, "area_m2", w.area_m2);
        read(wj, "u_W_per_m2K", w.u_W_per_m2K);
        read(wj, "solar_W_per_m2", w.solar_W_per_m2);
        z.walls.push_back(w);
      }
    }
    if (zj.contains("adjacency")) {
      for (const auto& aj : zj.at("adjacency")) {
        ZoneAdjacency a;
        read(aj, "zone_id", a.zone_id);
        read(aj, "eta_W_per_K", a.eta_W_per_K);
        z.adjacency.push_back(a);
      }
    }
    s.zones.push_back(std::move(z));
  }
  s.fcus.clear();
  for (const auto& fj : j.at("fcus")) {
    FcuParams f;
    read(fj, "rated_airflow_m3_s", f.rated_airflow_m3_s);
    read(fj, "rated_fan_power_W", f.rated_fan_power_W);
    read(fj, "mode_airflow_fractions", f.mode_airflow_fractions);
    read(fj, "rated_water_flow_m3_s", f.rated_water_flow_m3_s);
    read(fj, "coil_effectiveness_by_mode", f.coil_effectiveness_by_mode);
    s.fcus.push_back(f);
  }
  const json& p = j.at("pump");
  read(p, "alpha1", s.pump.alpha1);
  read(p, "alpha2", s.pump.alpha2);
  read(p, "alpha3", s.pump.alpha3);
  read(p, "rated_freq_Hz", s.pump.rated_freq_Hz);
  read(p, "rated_power_W", s.pump.rated_power_W);
  read(p, "min_freq_Hz", s.pump.min_freq_Hz);
  read(p, "max_freq_Hz", s.pump.max_freq_Hz);
  const json& n = j.at("network");
  read(n, "supply_main_resistance", s.network.supply_main_resistance);
  read(n, "return_main_resistance", s.network.return_main_resistance);
  read(n, "coil_resistance", s.network.coil_resistance);
  read(n, "bypass_resistance", s.network.bypass_resistance);
  read(n, "static_pressure_kPa", s.network.static_pressure_kPa);
  const json& o = j.at("occupancy");
  read(o, "roster", s.occupancy.roster);
  read(o, "attendance_prob", s.occupancy.attendance_prob);
  read(o, "arrival_mean_min", s.occupancy.arrival_mean_min);
  read(o, "arrival_sd_min", s.occupancy.arrival_sd_min);
  read(o, "lunch_start_mean_min", s.occupancy.lunch_start_mean_min);
  read(o, "lunch_start_sd_min", s.occupancy.lunch_start_sd_min);
  read(o, "lunch_duration_mean_min", s.occupancy.lunch_duration_mean_min);
  read(o, "lunch_duration_sd_min", s.occupancy.lunch_duration_sd_min);
  read(o, "departure_mean_min", s.occupancy.departure_mean_min);
  read(o, "departure_sd_min", s.occupancy.departure_sd_min);
  const json& w = j.at("outdoor");
  read(w, "base_C", s.outdoor.base_C);
  read(w, "amplitude_C", s.outdoor.amplitude_C);
  read(w, "peak_hour", s.outdoor.peak_hour);
  read(w, "day_offset_sd_C", s.outdoor.day_offset_sd_C);
  const json& r = j.at("rule");
  read(r, "warm_C", s.rule.warm_C);
  read(r, "hot_C", s.rule.hot_C);
  read(r, "crowd", s.rule.crowd);
  read(r, "noise_prob", s.rule.noise_prob);
  const json& c = j.at("comfort");
  read(c, "air_velocity_m_s", s.comfort.air_velocity_m_s);
  read(c, "relative_humidity_pct", s.comfort.relative_humidity_pct);
  read(c, "clothing_clo", s.comfort.clothing_clo);
  read(c, "metabolic_met", s.comfort.metabolic_met);
  read(c, "mean_radiant_equals_air", s.comfort.mean_radiant_equals_air);
  read(j.at("air"), "rho_kg_m3", s.air.rho_kg_m3);
  read(j.at("air"), "cp_J_kgK", s.air.cp_J_kgK);
  read(j, "chilled_supply_C", s.chilled_supply_C);
  read(j, "episode_steps", s.episode_steps);
  read(j, "control_interval_min", s.control_interval_min);
  read(j, "substep_s", s.substep_s);
  read(j, "lambda_P", s.lambda_P);
  read(j, "initial_temp_mean_C", s.initial_temp_mean_C);
  read(j, "initial_temp_spread_C", s.initial_temp_spread_C);
  read(j, "solver_tol_kPa", s.solver_tol_kPa);
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario config " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace hvacrl
