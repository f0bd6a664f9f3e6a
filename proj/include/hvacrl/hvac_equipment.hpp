#pragma once

#include <array>

namespace hvacrl {

inline constexpr int kFanLevels = 4;

/// Fan coil unit. Modes 0..3 map to airflow fractions and coil effectiveness.
struct FcuParams {
  double rated_airflow_m3_s = 0.2;
  double rated_fan_power_W = 120.0;
  std::array<double, kFanLevels> mode_airflow_fractions{0.0, 0.5, 0.75, 1.0};
  double rated_water_flow_m3_s = 2.0e-4;
  std::array<double, kFanLevels> coil_effectiveness_by_mode{0.0, 0.10, 0.15, 0.20};

  void validate() const;
};

/// Variable-speed circulating pump. Head in kPa, flow in m3/s.
struct PumpParams {
  double alpha1 = -2.0e7;
  double alpha2 = 0.0;
  double alpha3 = 160.0;
  double rated_freq_Hz = 50.0;
  double rated_power_W = 450.0;
  double min_freq_Hz = 20.0;
  double max_freq_Hz = 50.0;

  void validate() const;
};

double fcu_airflow(int mode, const FcuParams& params);
double fcu_fan_power(int mode, const FcuParams& params);

double pump_head_rated(double vdot_m3_s, const PumpParams& params);
double pump_head(double vdot_m3_s, double freq_Hz, const PumpParams& params);
double pump_power(double freq_Hz, const PumpParams& params);

/// Frequency proportional to the number of running FCUs, clamped to
/// [min_freq, max_freq]. With no FCU running the pump idles at min_freq.
double pump_frequency_for(int active_fcus, int total_fcus, const PumpParams& params);

}  // namespace hvacrl
