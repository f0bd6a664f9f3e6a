#pragma once

#include <map>
#include <vector>

namespace hvacrl {

/// One external wall. Its OTTV responds to the indoor/outdoor difference:
///   ottv = u * (t_out - t_in) + solar
struct WallSurface {
  double area_m2 = 0.0;
  double u_W_per_m2K = 0.0;
  double solar_W_per_m2 = 0.0;

  double ottv(double t_out_C, double t_in_C) const noexcept {
    return u_W_per_m2K * (t_out_C - t_in_C) + solar_W_per_m2;
  }
};

struct ZoneAdjacency {
  int zone_id = 0;
  double eta_W_per_K = 0.0;
};

struct ZoneParams {
  int zone_id = 1;
  double air_volume_m3 = 100.0;
  std::vector<WallSurface> walls;
  std::vector<ZoneAdjacency> adjacency;
  double beta = 1.0;
  double q_p_W = 70.0;
  double q_d_W = 10.0;

  /// Throws ConfigError when a field is out of its admissible range.
  void validate() const;
};

/// Checks per-zone invariants plus symmetry of the adjacency relation.
void validate_zones(const std::vector<ZoneParams>& zones);

struct AirProperties {
  double rho_kg_m3 = 1.2;
  double cp_J_kgK = 1005.0;
};

struct SupplyAir {
  double rho_kg_m3 = 1.2;
  double cp_J_kgK = 1005.0;
  double vdot_m3_s = 0.0;
  double t_supply_C = 0.0;
};

struct OutdoorContext {
  double t_out_C = 0.0;
  double t_in_C = 0.0;
};

double occupant_heat(double t_in_C, int occupants, const ZoneParams& params);

/// Sum over adjacent zones of (T_j - T_i) * eta_j. Every neighbour must be
/// present in `neighbor_temps_C`.
double interzone_heat(double t_in_C, const std::map<int, double>& neighbor_temps_C,
                      const ZoneParams& params);

double envelope_load(const ZoneParams& params, const OutdoorContext& context);

/// rho * cp * Vdot * (T_sup - T_in); negative when the supply air cools.
double supply_capacity(const SupplyAir& supply, double t_in_C);

/// One explicit-Euler step of the lumped-capacitance zone equation with the
/// fluxes held fixed over `dt_s`. Callers that need sub-stepping recompute
/// the fluxes and call this once per sub-step.
double zone_temperature_step(double t_in_C, double q_load_W, double q_sup_W,
                             const ZoneParams& params, double dt_s,
                             const AirProperties& air = {});

}  // namespace hvacrl
