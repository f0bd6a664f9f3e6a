#include "hvacrl/hvac_equipment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hvacrl/errors.hpp"

namespace hvacrl {
namespace {

void check_mode(int mode) {
  if (mode < 0 || mode >= kFanLevels) throw ConfigError("fan mode " + std::to_string(mode) + " out of range 0..3");
}

void check_freq(double freq_Hz, const PumpParams& p) {
  // f = 0 is the stopped pump and always admissible.
  if (freq_Hz == 0.0) return;
  if (!(freq_Hz >= p.min_freq_Hz && freq_Hz <= p.max_freq_Hz)) {
    throw ConfigError("pump frequency " + std::to_string(freq_Hz) + " Hz outside [" + std::to_string(p.min_freq_Hz) +
                      ", " + std::to_string(p.max_freq_Hz) + "]");
  }
}

}  // namespace

void FcuParams::validate() const {
  if (!(rated_airflow_m3_s > 0.0) || !(rated_fan_power_W > 0.0) || !(rated_water_flow_m3_s > 0.0)) {
    throw ConfigError("FCU rated airflow, fan power and water flow must be positive");
  }
  if (mode_airflow_fractions[0] != 0.0 || mode_airflow_fractions[3] != 1.0) {
    throw ConfigError("FCU airflow fractions must start at 0 and end at 1");
  }
  if (!std::is_sorted(mode_airflow_fractions.begin(), mode_airflow_fractions.end())) {
    throw ConfigError("FCU airflow fractions must be non-decreasing");
  }
  for (double e : coil_effectiveness_by_mode) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("coil effectiveness must lie in [0, 1]");
  }
}

void PumpParams::validate() const {
  if (!(alpha1 < 0.0)) throw ConfigError("pump alpha1 must be negative");
  if (!(alpha3 > 0.0)) throw ConfigError("pump shutoff head alpha3 must be positive");
  if (!(rated_freq_Hz > 0.0) || !(rated_power_W > 0.0)) throw ConfigError("pump rated values must be positive");
  if (!(min_freq_Hz >= 0.0 && min_freq_Hz <= max_freq_Hz && max_freq_Hz <= rated_freq_Hz)) {
    throw ConfigError("pump frequencies must satisfy 0 <= min <= max <= rated");
  }
}

double fcu_airflow(int mode, const FcuParams& params) {
  check_mode(mode);
  return params.mode_airflow_fractions[static_cast<std::size_t>(mode)] * params.rated_airflow_m3_s;
}

double fcu_fan_power(int mode, const FcuParams& params) {
  const double ratio = fcu_airflow(mode, params) / params.rated_airflow_m3_s;
  if (ratio == 0.0) return 0.0;
  return std::pow(ratio, 1.5) * params.rated_fan_power_W;
}

double pump_head_rated(double vdot_m3_s, const PumpParams& params) {
  return params.alpha1 * vdot_m3_s * vdot_m3_s + params.alpha2 * vdot_m3_s + params.alpha3;
}

double pump_head(double vdot_m3_s, double freq_Hz, const PumpParams& params) {
  check_freq(freq_Hz, params);
  const double s = freq_Hz / params.rated_freq_Hz;
  return s * s * pump_head_rated(vdot_m3_s, params);
}

double pump_power(double freq_Hz, const PumpParams& params) {
  check_freq(freq_Hz, params);
  const double s = freq_Hz / params.rated_freq_Hz;
  return s * s * s * params.rated_power_W;
}

double pump_frequency_for(int active_fcus, int total_fcus, const PumpParams& params) {
  if (total_fcus <= 0) throw ConfigError("pump rule needs at least one FCU");
  const double f = params.rated_freq_Hz * static_cast<double>(active_fcus) / static_cast<double>(total_fcus);
  return std::clamp(f, params.min_freq_Hz, params.max_freq_Hz);
}

}  // namespace hvacrl
