#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hvacrl/hvac_equipment.hpp"
#include "hvacrl/thermal_zone.hpp"

namespace hvacrl {

inline constexpr double kWaterDensity = 1000.0;  // kg/m3
inline constexpr double kWaterCp = 4186.0;       // J/(kg K)

enum class BranchKind { kPipe, kFcuCoil, kPump, kBypass };

const char* to_string(BranchKind kind) noexcept;

/// Directed edge of the water network. Pressure drop along the branch
/// direction follows R * Q * |Q| (kPa, with Q in m3/s) except for the pump,
/// whose head comes from the pump curve.
struct Branch {
  int id = 0;
  int upstream = 0;
  int downstream = 0;
  double resistance = 0.0;  // kPa s2/m6
  BranchKind kind = BranchKind::kPipe;
  int zone_id = 0;  // coil branches only
};

struct NetworkConfig {
  double supply_main_resistance = 1.0e8;
  double return_main_resistance = 1.0e8;
  double coil_resistance = 2.0e9;
  double bypass_resistance = 4.0e10;
  double static_pressure_kPa = 150.0;
};

/// Node/branch graph with its incidence matrix: +1 where the node is the
/// branch's upstream end, -1 at the downstream end.
class NetworkTopology {
 public:
  NetworkTopology(std::vector<std::string> node_names, std::vector<Branch> branches);

  std::size_t node_count() const noexcept { return node_names_.size(); }
  std::size_t branch_count() const noexcept { return branches_.size(); }
  const std::vector<std::string>& node_names() const noexcept { return node_names_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }
  const Eigen::MatrixXi& incidence() const noexcept { return incidence_; }

  int pump_branch() const noexcept { return pump_branch_; }
  /// Coil branch indices in declaration order (one per FCU).
  const std::vector<int>& coil_branches() const noexcept { return coil_branches_; }

 private:
  std::vector<std::string> node_names_;
  std::vector<Branch> branches_;
  Eigen::MatrixXi incidence_;
  int pump_branch_ = -1;
  std::vector<int> coil_branches_;
};

/// Supply header -> one coil per zone plus a bypass -> return header -> pump.
NetworkTopology build_network(const std::vector<ZoneParams>& zones, const NetworkConfig& config);

struct HydraulicSolution {
  std::vector<double> branch_flows_m3_s;
  std::vector<double> node_pressures_kPa;
  double pump_flow_m3_s = 0.0;
  double pump_head_kPa = 0.0;
  int iterations = 0;
  double residual_kPa = 0.0;
  /// max_n |sum_b M(n,b) Q_b| / max_b |Q_b| (0 when no flow).
  double mass_imbalance = 0.0;
};

/// Newton-Raphson solve in loop-flow unknowns. Each instance owns its scratch
/// buffers; use one instance per thread.
class HydraulicSolver {
 public:
  HydraulicSolver(NetworkTopology topology, PumpParams pump, double design_flow_m3_s);

  const NetworkTopology& topology() const noexcept { return topology_; }
  const PumpParams& pump() const noexcept { return pump_; }

  int max_iterations = 100;
  double static_pressure_kPa = 0.0;  // pressure held at the pump inlet

  /// `valve_open` has one entry per coil branch. Closed coils carry exactly
  /// zero flow; pipes, bypass and pump always conduct.
  HydraulicSolution solve(double pump_freq_Hz, const std::vector<bool>& valve_open, double tol_kPa = 1e-3);

 private:
  void build_loops(const std::vector<bool>& conducting);
  double head_loss(const Branch& b, double q, double speed_sq, double* slope) const;

  NetworkTopology topology_;
  PumpParams pump_;
  double design_flow_;

  // scratch
  std::vector<int> parent_branch_;
  std::vector<int> bfs_order_;
  std::vector<int> chords_;
  Eigen::MatrixXd loops_;
};

HydraulicSolution solve_flows(const NetworkTopology& topology, const PumpParams& pump, double pump_freq_Hz,
                              const std::vector<bool>& valve_open, double tol_kPa, double design_flow_m3_s,
                              double static_pressure_kPa = 0.0);

struct CoilExchange {
  double t_water_out_C = 0.0;
  double q_coil_W = 0.0;
};

/// Effectiveness model with the water side as the minimum capacity stream.
/// q > 0 means heat taken from the air into the water.
CoilExchange coil_outlet_temp(double t_water_in_C, double t_air_C, double water_flow_m3_s, double effectiveness);

struct CoilState {
  double effectiveness = 0.0;
  double t_air_C = 0.0;
};

struct WaterTemperatures {
  std::vector<double> node_C;
  std::vector<double> branch_outlet_C;
  std::vector<double> branch_inlet_C;
  std::vector<double> coil_q_W;  // per branch, zero for non-coils
  double supply_C = 0.0;
  double return_C = 0.0;
  double total_coil_q_W = 0.0;
};

/// Energy transport in flow order. Mixing nodes take flow-weighted averages
/// and pipes pass temperature unchanged. `coil_states` follows coil_branches().
WaterTemperatures propagate_temperatures(const NetworkTopology& topology, const HydraulicSolution& solution,
                                         std::span<const CoilState> coil_states, double supply_temp_C);

std::string format_solution(const NetworkTopology& topology, const HydraulicSolution& solution);

}  // namespace hvacrl
