#include "hvacrl/comfort.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hvacrl/errors.hpp"

namespace hvacrl {

void ComfortParams::validate() const {
  if (!(air_velocity_m_s > 0.0) || !(relative_humidity_pct > 0.0) || !(clothing_clo > 0.0) || !(metabolic_met > 0.0)) {
    throw ConfigError("comfort parameters must be strictly positive");
  }
  if (!mean_radiant_equals_air) throw ConfigError("only T_r = T_a is supported");
}

// ISO 7730 iteration for the clothing surface temperature, written in the
// normalised form of the standard's reference program.
double pmv(double t_air_C, const ComfortParams& params) {
  if (!(t_air_C >= 10.0 && t_air_C <= 40.0)) {
    throw NumericalError("PMV air temperature " + std::to_string(t_air_C) + " C outside [10, 40]");
  }
  const double ta = t_air_C;
  const double tr = t_air_C;
  const double pa = params.relative_humidity_pct * 10.0 * std::exp(16.6536 - 4030.183 / (ta + 235.0));
  const double icl = 0.155 * params.clothing_clo;
  const double m = params.metabolic_met * 58.15;
  const double w = 0.0;
  const double mw = m - w;
  const double fcl = icl <= 0.078 ? 1.0 + 1.29 * icl : 1.05 + 0.645 * icl;
  const double hcf = 12.1 * std::sqrt(params.air_velocity_m_s);
  const double taa = ta + 273.0;
  const double tra = tr + 273.0;

  double tcla = taa + (35.5 - ta) / (3.5 * icl + 0.1);
  const double p1 = icl * fcl;
  const double p2 = p1 * 3.96;
  const double p3 = p1 * 100.0;
  const double p4 = p1 * taa;
  const double p5 = 308.7 - 0.028 * mw + p2 * std::pow(tra / 100.0, 4.0);
  double xn = tcla / 100.0;
  double xf = xn;
  double hc = hcf;
  constexpr double kTol = 1e-5 / 100.0;  // xn is in units of 100 K
  int n = 0;
  do {
    if (++n > 200) throw NumericalError("PMV clothing temperature iteration did not converge");
    xf = (xf + xn) / 2.0;
    const double hcn = 2.38 * std::pow(std::abs(100.0 * xf - taa), 0.25);
    hc = std::max(hcf, hcn);
    xn = (p5 + p4 * hc - p2 * std::pow(xf, 4.0)) / (100.0 + p3 * hc);
  } while (std::abs(xn - xf) > kTol);
  const double tcl = 100.0 * xn - 273.0;

  const double hl1 = 3.05e-3 * (5733.0 - 6.99 * mw - pa);
  const double hl2 = mw > 58.15 ? 0.42 * (mw - 58.15) : 0.0;
  const double hl3 = 1.7e-5 * m * (5867.0 - pa);
  const double hl4 = 0.0014 * m * (34.0 - ta);
  const double hl5 = 3.96 * fcl * (std::pow(xn, 4.0) - std::pow(tra / 100.0, 4.0));
  const double hl6 = fcl * hc * (tcl - ta);
  const double ts = 0.303 * std::exp(-0.036 * m) + 0.028;
  const double value = ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6);
  return std::clamp(value, -4.0, 4.0);
}

double ppd(double pmv_value) {
  const double p2 = pmv_value * pmv_value;
  return 100.0 - 95.0 * std::exp(-0.03353 * p2 * p2 - 0.2179 * p2);
}

double mean_ppd(std::span<const double> zone_ppds, std::span<const int> zone_occupancy) {
  if (zone_ppds.size() != zone_occupancy.size()) throw ConfigError("PPD and occupancy vectors differ in length");
  long total = 0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < zone_ppds.size(); ++i) {
    if (zone_occupancy[i] < 0) throw ConfigError("negative occupancy in zone " + std::to_string(i + 1));
    total += zone_occupancy[i];
    weighted += zone_occupancy[i] * zone_ppds[i];
  }
  return total > 0 ? weighted / static_cast<double>(total) : 0.0;
}

double step_reward(double ppd_mean, double power_kW, int occupants_total, double lambda_P) {
  if (!(lambda_P > 0.0)) throw ConfigError("lambda_P must be positive");
  if (occupants_total > 0) return -ppd_mean - lambda_P * power_kW;
  return -lambda_P * power_kW;
}

double episode_energy(std::span<const double> power_series_kW, double dt_h) {
  return std::accumulate(power_series_kW.begin(), power_series_kW.end(), 0.0) * dt_h;
}

}  // namespace hvacrl
