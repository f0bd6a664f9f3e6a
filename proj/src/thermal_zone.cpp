#include "hvacrl/thermal_zone.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hvacrl/errors.hpp"

namespace hvacrl {

void ZoneParams::validate() const {
  const std::string where = "zone " + std::to_string(zone_id) + ": ";
  if (!(air_volume_m3 > 0.0)) throw ConfigError(where + "air volume must be positive");
  if (!(beta >= 0.8 && beta <= 1.2)) throw ConfigError(where + "beta must lie in [0.8, 1.2]");
  if (!(q_p_W > 0.0)) throw ConfigError(where + "q_p must be positive");
  if (!(q_d_W >= 0.0)) throw ConfigError(where + "q_d must be non-negative");
  for (const auto& w : walls) {
    if (!(w.area_m2 >= 0.0) || !(w.u_W_per_m2K >= 0.0) || !(w.solar_W_per_m2 >= 0.0)) {
      throw ConfigError(where + "wall area, U and solar terms must be non-negative");
    }
  }
  for (const auto& adj : adjacency) {
    if (adj.zone_id == zone_id) throw ConfigError(where + "zone lists itself as neighbour");
    if (!(adj.eta_W_per_K >= 0.0)) throw ConfigError(where + "eta must be non-negative");
  }
}

void validate_zones(const std::vector<ZoneParams>& zones) {
  for (const auto& z : zones) z.validate();
  auto find = [&](int id) {
    return std::find_if(zones.begin(), zones.end(), [id](const ZoneParams& z) { return z.zone_id == id; });
  };
  for (const auto& z : zones) {
    if (std::count_if(zones.begin(), zones.end(), [&](const ZoneParams& o) { return o.zone_id == z.zone_id; }) != 1) {
      throw ConfigError("duplicate zone id " + std::to_string(z.zone_id));
    }
    for (const auto& adj : z.adjacency) {
      auto other = find(adj.zone_id);
      if (other == zones.end()) {
        throw ConfigError("zone " + std::to_string(z.zone_id) + " lists unknown neighbour " +
                          std::to_string(adj.zone_id));
      }
      const bool symmetric = std::any_of(other->adjacency.begin(), other->adjacency.end(),
                                         [&](const ZoneAdjacency& back) { return back.zone_id == z.zone_id; });
      if (!symmetric) {
        throw ConfigError("adjacency " + std::to_string(z.zone_id) + "-" + std::to_string(adj.zone_id) +
                          " is not symmetric");
      }
    }
  }
}

double occupant_heat(double t_in_C, int occupants, const ZoneParams& params) {
  const double per_person = (37.0 - t_in_C) / (37.0 - 24.0) * params.q_p_W + params.q_d_W;
  return per_person * static_cast<double>(occupants);
}

double interzone_heat(double t_in_C, const std::map<int, double>& neighbor_temps_C,
                      const ZoneParams& params) {
  double q = 0.0;
  for (const auto& adj : params.adjacency) {
    auto it = neighbor_temps_C.find(adj.zone_id);
    if (it == neighbor_temps_C.end()) {
      throw ConfigError("zone " + std::to_string(params.zone_id) + ": no temperature for neighbour " +
                        std::to_string(adj.zone_id));
    }
    q += (it->second - t_in_C) * adj.eta_W_per_K;
  }
  return q;
}

double envelope_load(const ZoneParams& params, const OutdoorContext& context) {
  double q = 0.0;
  for (const auto& w : params.walls) q += w.ottv(context.t_out_C, context.t_in_C) * w.area_m2;
  return q;
}

double supply_capacity(const SupplyAir& supply, double t_in_C) {
  return supply.rho_kg_m3 * supply.cp_J_kgK * supply.vdot_m3_s * (supply.t_supply_C - t_in_C);
}

double zone_temperature_step(double t_in_C, double q_load_W, double q_sup_W,
                             const ZoneParams& params, double dt_s, const AirProperties& air) {
  if (!std::isfinite(t_in_C) || !std::isfinite(q_load_W) || !std::isfinite(q_sup_W) || !std::isfinite(dt_s)) {
    throw NumericalError("zone " + std::to_string(params.zone_id) + ": non-finite input to temperature step");
  }
  if (!(dt_s > 0.0)) throw NumericalError("time step must be positive");
  const double capacitance = air.rho_kg_m3 * air.cp_J_kgK * params.air_volume_m3;
  const double net = q_load_W + q_sup_W;
  if (net == 0.0) return t_in_C;
  const double next = t_in_C + dt_s * net / capacitance * params.beta;
  if (!std::isfinite(next)) throw NumericalError("zone temperature diverged");
  return next;
}

}  // namespace hvacrl
