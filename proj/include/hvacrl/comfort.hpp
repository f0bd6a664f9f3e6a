#pragma once

#include <span>

namespace hvacrl {

/// Fixed PMV inputs for the office case. Mean radiant temperature is taken
/// equal to air temperature.
struct ComfortParams {
  double air_velocity_m_s = 0.15;
  double relative_humidity_pct = 40.0;
  double clothing_clo = 0.63;
  double metabolic_met = 1.1;
  bool mean_radiant_equals_air = true;

  void validate() const;
};

struct StepMetrics {
  double ppd_mean_pct = 0.0;
  double pmv_abs_mean = 0.0;
  double power_kW = 0.0;
  int occupants_total = 0;
  double reward = 0.0;
  /// reward = -comfort_penalty - energy_penalty
  double comfort_penalty = 0.0;
  double energy_penalty = 0.0;
};

/// Fanger PMV for air temperature in [10, 40] C. The clothing surface
/// temperature is iterated to 1e-5 K (at most 200 iterations, NumericalError
/// otherwise). The result is clamped to [-4, 4].
double pmv(double t_air_C, const ComfortParams& params = {});

/// 100 - 95 exp(-0.03353 PMV^4 - 0.2179 PMV^2)
double ppd(double pmv_value);

/// Occupancy-weighted mean; exactly 0 when nobody is present.
double mean_ppd(std::span<const double> zone_ppds, std::span<const int> zone_occupancy);

double step_reward(double ppd_mean, double power_kW, int occupants_total, double lambda_P);

/// sum_t P_t * dt_h
double episode_energy(std::span<const double> power_series_kW, double dt_h = 5.0 / 60.0);

}  // namespace hvacrl
