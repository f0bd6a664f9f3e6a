#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "hvacrl/comfort.hpp"
#include "hvacrl/errors.hpp"
#include "hvacrl/hvac_equipment.hpp"
#include "hvacrl/hydraulic_network.hpp"
#include "hvacrl/scenario.hpp"
#include "hvacrl/thermal_zone.hpp"
#include "oracles.hpp"

using namespace hvacrl;

namespace {

ZoneParams plain_zone() {
  ZoneParams z;
  z.zone_id = 1;
  z.air_volume_m3 = 100.0;
  z.q_p_W = 70.0;
  z.q_d_W = 10.0;
  return z;
}

}  // namespace

TEST(ThermalZone, OccupantHeat) {
  const ZoneParams z = plain_zone();
  EXPECT_DOUBLE_EQ(occupant_heat(24.0, 3, z), 240.0);
  EXPECT_DOUBLE_EQ(occupant_heat(30.0, 0, z), 0.0);
  EXPECT_DOUBLE_EQ(occupant_heat(37.0, 2, z), 20.0);
}

TEST(ThermalZone, InterzoneHeat) {
  ZoneParams z = plain_zone();
  z.adjacency = {{2, 5.0}};
  EXPECT_DOUBLE_EQ(interzone_heat(25.0, {{2, 25.0}}, z), 0.0);
  EXPECT_DOUBLE_EQ(interzone_heat(25.0, {{2, 27.0}}, z), 10.0);
  z.adjacency = {{2, 5.0}, {3, 5.0}};
  EXPECT_DOUBLE_EQ(interzone_heat(25.0, {{2, 26.0}, {3, 24.0}}, z), 0.0);
  EXPECT_THROW(interzone_heat(25.0, {{2, 26.0}}, z), ConfigError);
}

TEST(ThermalZone, EnvelopeLoad) {
  ZoneParams z = plain_zone();
  const OutdoorContext ctx{30.0, 25.0};
  EXPECT_DOUBLE_EQ(envelope_load(z, ctx), 0.0);
  // u = 0 leaves the solar term as the OTTV
  z.walls = {{12.0, 0.0, 20.0}};
  EXPECT_DOUBLE_EQ(envelope_load(z, ctx), 240.0);
  z.walls.push_back({8.0, 0.0, 15.0});
  EXPECT_DOUBLE_EQ(envelope_load(z, ctx), 360.0);
}

TEST(ThermalZone, SupplyCapacity) {
  EXPECT_DOUBLE_EQ(supply_capacity({1.2, 1005.0, 0.1, 26.0}, 26.0), 0.0);
  EXPECT_NEAR(supply_capacity({1.2, 1005.0, 0.1, 16.0}, 26.0), -1206.0, 1e-9);
  EXPECT_DOUBLE_EQ(supply_capacity({1.2, 1005.0, 0.0, 16.0}, 26.0), 0.0);
}

TEST(ThermalZone, EulerStep) {
  const ZoneParams z = plain_zone();
  EXPECT_DOUBLE_EQ(zone_temperature_step(25.0, 500.0, -500.0, z, 300.0), 25.0);
  // V=100, rho=1.2, cp=1005, beta=1, Q=1206 W, dt=300 s -> +3 K
  const double dT = 1206.0 * 300.0 / (1.2 * 1005.0 * 100.0 * 1.0);
  EXPECT_NEAR(dT, 3.0, 1e-12);
  EXPECT_NEAR(zone_temperature_step(25.0, 1206.0, 0.0, z, 300.0), 28.0, 1e-12);
}

TEST(ThermalZone, Validation) {
  ZoneParams z = plain_zone();
  z.beta = 1.5;
  EXPECT_THROW(z.validate(), ConfigError);
  z = plain_zone();
  z.air_volume_m3 = 0.0;
  EXPECT_THROW(z.validate(), ConfigError);
  ZoneParams a = plain_zone(), b = plain_zone();
  b.zone_id = 2;
  a.adjacency = {{2, 4.0}};
  EXPECT_THROW(validate_zones({a, b}), ConfigError);
  b.adjacency = {{1, 4.0}};
  EXPECT_NO_THROW(validate_zones({a, b}));
}

TEST(Equipment, FanCurves) {
  FcuParams p;
  EXPECT_DOUBLE_EQ(fcu_airflow(0, p), 0.0);
  EXPECT_DOUBLE_EQ(fcu_airflow(3, p), p.rated_airflow_m3_s);
  EXPECT_DOUBLE_EQ(fcu_airflow(1, p), 0.1);
  p.rated_fan_power_W = 100.0;
  EXPECT_DOUBLE_EQ(fcu_fan_power(0, p), 0.0);
  EXPECT_DOUBLE_EQ(fcu_fan_power(3, p), 100.0);
  EXPECT_NEAR(fcu_fan_power(1, p), 35.355, 5e-4);
  EXPECT_THROW(fcu_airflow(4, p), ConfigError);
}

TEST(Equipment, PumpAffinity) {
  PumpParams p;
  p.alpha1 = -100.0;
  p.alpha2 = 0.0;
  p.alpha3 = 50.0;
  EXPECT_DOUBLE_EQ(pump_head_rated(0.0, p), 50.0);
  EXPECT_DOUBLE_EQ(pump_head_rated(0.5, p), 25.0);
  EXPECT_DOUBLE_EQ(pump_head(0.3, p.rated_freq_Hz, p), pump_head_rated(0.3, p));
  EXPECT_DOUBLE_EQ(pump_head(0.0, p.rated_freq_Hz / 2, p), 12.5);
  EXPECT_DOUBLE_EQ(pump_head(0.2, 0.0, p), 0.0);
  EXPECT_DOUBLE_EQ(pump_power(p.rated_freq_Hz, p), p.rated_power_W);
  EXPECT_DOUBLE_EQ(pump_power(p.rated_freq_Hz / 2, p), p.rated_power_W / 8);
  EXPECT_DOUBLE_EQ(pump_power(0.0, p), 0.0);
  EXPECT_THROW(pump_power(10.0, p), ConfigError);
}

TEST(Equipment, PumpFrequencyRule) {
  const PumpParams p;
  EXPECT_DOUBLE_EQ(pump_frequency_for(7, 7, p), 50.0);
  EXPECT_DOUBLE_EQ(pump_frequency_for(0, 7, p), p.min_freq_Hz);
  EXPECT_DOUBLE_EQ(pump_frequency_for(1, 7, p), p.min_freq_Hz);
  EXPECT_NEAR(pump_frequency_for(4, 7, p), 200.0 / 7.0, 1e-12);
  for (int n = 1; n <= 7; ++n) EXPECT_LE(pump_frequency_for(n - 1, 7, p), pump_frequency_for(n, 7, p));
}

// -------------------------------------------------------------- hydraulics

class Hydraulics : public ::testing::Test {
 protected:
  Scenario sc = default_scenario();
  NetworkTopology topo = build_network(sc.zones, sc.network);
};

TEST_F(Hydraulics, TopologyShape) {
  EXPECT_EQ(topo.coil_branches().size(), 7u);
  EXPECT_EQ(topo.branch_count(), 7u + 1u + 1u + 2u);
  const auto& m = topo.incidence();
  for (int b = 0; b < m.cols(); ++b) {
    EXPECT_EQ(m.col(b).sum(), 0);
    EXPECT_EQ(m.col(b).cwiseAbs().sum(), 2);
  }
  const NetworkTopology one = build_network({sc.zones.front()}, sc.network);
  int parallel = 0;
  for (const auto& b : one.branches()) parallel += b.kind == BranchKind::kFcuCoil || b.kind == BranchKind::kBypass;
  EXPECT_EQ(parallel, 2);
  EXPECT_THROW(build_network({}, sc.network), TopologyError);
}

TEST_F(Hydraulics, ClosedValvesMatchBisection) {
  HydraulicSolver solver(topo, sc.pump, sc.design_water_flow());
  double r_loop = 0.0;
  for (const auto& b : topo.branches()) {
    if (b.kind == BranchKind::kPipe || b.kind == BranchKind::kBypass) r_loop += b.resistance;
  }
  for (double f : {20.0, 35.0, 50.0}) {
    const auto sol = solver.solve(f, std::vector<bool>(7, false), 1e-9);
    const double s2 = (f / sc.pump.rated_freq_Hz) * (f / sc.pump.rated_freq_Hz);
    const auto residual = [&](double q) { return s2 * pump_head_rated(q, sc.pump) - r_loop * q * q; };
    const double q_ref = oracle::bisect(residual, 0.0, 1.0, 1e-12);
    EXPECT_NEAR(sol.pump_flow_m3_s, q_ref, 1e-6) << "f=" << f;
    for (int c : topo.coil_branches()) EXPECT_EQ(sol.branch_flows_m3_s[static_cast<std::size_t>(c)], 0.0);
  }
}

TEST_F(Hydraulics, SymmetricCoilsShareFlow) {
  std::vector<ZoneParams> zones(2, sc.zones.front());
  zones[0].adjacency.clear();
  zones[1].adjacency.clear();
  zones[1].zone_id = 2;
  const NetworkTopology two = build_network(zones, sc.network);
  HydraulicSolver solver(two, sc.pump, sc.design_water_flow());
  const auto sol = solver.solve(50.0, {true, true});
  const auto& c = two.coil_branches();
  EXPECT_NEAR(sol.branch_flows_m3_s[static_cast<std::size_t>(c[0])],
              sol.branch_flows_m3_s[static_cast<std::size_t>(c[1])], 1e-12);
  EXPECT_GT(sol.branch_flows_m3_s[static_cast<std::size_t>(c[0])], 0.0);
}

TEST_F(Hydraulics, StoppedPump) {
  HydraulicSolver solver(topo, sc.pump, sc.design_water_flow());
  const auto sol = solver.solve(0.0, std::vector<bool>(7, true));
  for (double q : sol.branch_flows_m3_s) EXPECT_EQ(q, 0.0);
  EXPECT_EQ(sol.residual_kPa, 0.0);
}

TEST_F(Hydraulics, EverySubsetConverges) {
  HydraulicSolver solver(topo, sc.pump, sc.design_water_flow());
  for (int subset = 0; subset < 128; ++subset) {
    std::vector<bool> open(7);
    int active = 0;
    for (int j = 0; j < 7; ++j) active += open[static_cast<std::size_t>(j)] = (subset >> j) & 1;
    const auto sol = solver.solve(pump_frequency_for(active, 7, sc.pump), open);
    EXPECT_LE(sol.residual_kPa, 1e-3);
    EXPECT_LE(sol.mass_imbalance, 1e-9);
    EXPECT_GT(sol.pump_flow_m3_s, 0.0);
  }
}

TEST_F(Hydraulics, NonConvergenceReportsResidual) {
  HydraulicSolver solver(topo, sc.pump, sc.design_water_flow());
  solver.max_iterations = 1;
  try {
    solver.solve(50.0, std::vector<bool>(7, true), 1e-14);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_GT(e.residual_kPa(), 0.0);
    EXPECT_EQ(e.iterations(), 1);
  }
}

TEST(Coil, OutletTemperature) {
  const auto none = coil_outlet_temp(7.0, 27.0, 1e-4, 0.0);
  EXPECT_DOUBLE_EQ(none.t_water_out_C, 7.0);
  EXPECT_DOUBLE_EQ(none.q_coil_W, 0.0);
  EXPECT_DOUBLE_EQ(coil_outlet_temp(7.0, 27.0, 1e-4, 1.0).t_water_out_C, 27.0);
  const auto half = coil_outlet_temp(7.0, 27.0, 1e-4, 0.5);
  EXPECT_DOUBLE_EQ(half.t_water_out_C, 17.0);
  EXPECT_NEAR(half.q_coil_W, kWaterDensity * 1e-4 * kWaterCp * 10.0, 1e-9);
}

TEST_F(Hydraulics, TemperaturePropagation) {
  HydraulicSolver solver(topo, sc.pump, sc.design_water_flow());
  const auto sol = solver.solve(50.0, std::vector<bool>(7, true));
  std::vector<CoilState> idle(7, {0.0, 27.0});
  const auto flat = propagate_temperatures(topo, sol, idle, 7.0);
  EXPECT_NEAR(flat.return_C, 7.0, 1e-12);

  // a single open coil with the bypass carrying the remainder mixes by flow
  std::vector<bool> one(7, false);
  one[0] = true;
  const auto s1 = solver.solve(20.0, one);
  std::vector<CoilState> st(7, {0.0, 27.0});
  st[0].effectiveness = 0.5;
  const auto w = propagate_temperatures(topo, s1, st, 7.0);
  const double q_coil = s1.branch_flows_m3_s[static_cast<std::size_t>(topo.coil_branches()[0])];
  const double mixed = (q_coil * 17.0 + (s1.pump_flow_m3_s - q_coil) * 7.0) / s1.pump_flow_m3_s;
  EXPECT_NEAR(w.return_C, mixed, 1e-9);
  EXPECT_NEAR(w.branch_outlet_C[static_cast<std::size_t>(topo.coil_branches()[0])], 17.0, 1e-12);
}

// -------------------------------------------------------------- comfort

TEST(Comfort, PpdFormula) {
  EXPECT_EQ(ppd(0.0), 5.0);
  const double edge = 100.0 - 95.0 * std::exp(-0.03353 * 0.0625 - 0.2179 * 0.25);
  EXPECT_DOUBLE_EQ(ppd(0.5), edge);
  EXPECT_DOUBLE_EQ(ppd(-0.5), edge);
  EXPECT_NEAR(ppd(0.5), 10.2, 0.05);
  for (double v = -3.0; v < 3.0; v += 0.25) EXPECT_GE(ppd(v), 5.0);
}

TEST(Comfort, PmvAgreesWithReference) {
  const ComfortParams p;
  for (int t = 18; t <= 32; ++t) {
    const double ref = oracle::fanger_pmv(t, t, p.air_velocity_m_s, p.relative_humidity_pct, p.metabolic_met,
                                          p.clothing_clo);
    EXPECT_NEAR(pmv(t, p), ref, 0.01) << "T=" << t;
  }
  // frozen from the reference implementation
  EXPECT_NEAR(oracle::fanger_pmv(26.0, 26.0, 0.15, 40.0, 1.1, 0.63), 0.222967, 1e-6);
  EXPECT_NEAR(pmv(26.0, p), 0.222967, 0.01);
}

TEST(Comfort, PmvMonotoneWithNeutralPoint) {
  double prev = pmv(16.0);
  for (double t = 16.5; t <= 34.0; t += 0.5) {
    const double v = pmv(t);
    EXPECT_GT(v, prev);
    prev = v;
  }
  const double t_star = oracle::bisect([](double t) { return pmv(t); }, 18.0, 32.0, 1e-10);
  EXPECT_NEAR(pmv(t_star), 0.0, 1e-6);
  EXPECT_NEAR(ppd(pmv(t_star)), 5.0, 1e-6);
  EXPECT_THROW(pmv(45.0), NumericalError);
}

TEST(Comfort, Aggregates) {
  const std::vector<double> p2{10.0, 20.0};
  EXPECT_EQ(mean_ppd(p2, std::vector<int>{0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(mean_ppd(std::vector<double>{12.0, 30.0}, std::vector<int>{2, 0}), 12.0);
  EXPECT_DOUBLE_EQ(mean_ppd(p2, std::vector<int>{1, 3}), 17.5);
  EXPECT_DOUBLE_EQ(step_reward(0.0, 10.0, 0, 3.0), -30.0);
  EXPECT_DOUBLE_EQ(step_reward(8.0, 10.0, 5, 3.0), -38.0);
  EXPECT_DOUBLE_EQ(step_reward(8.0, 0.0, 5, 3.0), -8.0);
  EXPECT_NEAR(episode_energy(std::vector<double>(120, 12.0)), 120.0, 1e-9);
  EXPECT_EQ(episode_energy(std::vector<double>(120, 0.0)), 0.0);
  std::vector<double> mixed(60, 6.0);
  mixed.resize(120, 18.0);
  EXPECT_NEAR(episode_energy(mixed), 120.0, 1e-9);
}
