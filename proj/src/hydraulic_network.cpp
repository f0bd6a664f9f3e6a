#include "hvacrl/hydraulic_network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "hvacrl/errors.hpp"

namespace hvacrl {

const char* to_string(BranchKind kind) noexcept {
  switch (kind) {
    case BranchKind::kPipe: return "pipe";
    case BranchKind::kFcuCoil: return "fcu_coil";
    case BranchKind::kPump: return "pump";
    case BranchKind::kBypass: return "bypass";
  }
  return "?";
}

NetworkTopology::NetworkTopology(std::vector<std::string> node_names, std::vector<Branch> branches)
    : node_names_(std::move(node_names)), branches_(std::move(branches)) {
  const int n = static_cast<int>(node_names_.size());
  const int e = static_cast<int>(branches_.size());
  if (n < 2 || e < 2) throw TopologyError("network needs at least two nodes and two branches");

  std::set<int> ids;
  int bypasses = 0;
  incidence_ = Eigen::MatrixXi::Zero(n, e);
  for (int j = 0; j < e; ++j) {
    const Branch& b = branches_[static_cast<std::size_t>(j)];
    if (!ids.insert(b.id).second) throw TopologyError("duplicate branch id " + std::to_string(b.id));
    if (b.upstream < 0 || b.upstream >= n || b.downstream < 0 || b.downstream >= n || b.upstream == b.downstream) {
      throw TopologyError("branch " + std::to_string(b.id) + " has invalid endpoints");
    }
    if (b.kind != BranchKind::kPump && !(b.resistance > 0.0)) {
      throw TopologyError("branch " + std::to_string(b.id) + " needs a positive resistance");
    }
    incidence_(b.upstream, j) = 1;
    incidence_(b.downstream, j) = -1;
    if (b.kind == BranchKind::kPump) {
      if (pump_branch_ >= 0) throw TopologyError("network has more than one pump branch");
      pump_branch_ = j;
    } else if (b.kind == BranchKind::kFcuCoil) {
      coil_branches_.push_back(j);
    } else if (b.kind == BranchKind::kBypass) {
      ++bypasses;
    }
  }
  if (pump_branch_ < 0) throw TopologyError("network has no pump branch");
  if (bypasses == 0) throw TopologyError("network has no bypass branch");

  // connectivity (undirected)
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const auto& b : branches_) {
      for (auto [from, to] : {std::pair{b.upstream, b.downstream}, std::pair{b.downstream, b.upstream}}) {
        if (from == u && !seen[static_cast<std::size_t>(to)]) {
          seen[static_cast<std::size_t>(to)] = 1;
          queue.push_back(to);
        }
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw TopologyError("network graph is not connected");
}

NetworkTopology build_network(const std::vector<ZoneParams>& zones, const NetworkConfig& config) {
  if (zones.empty()) throw TopologyError("network needs at least one zone");
  std::set<int> zone_ids;
  for (const auto& z : zones) {
    if (!zone_ids.insert(z.zone_id).second) throw TopologyError("duplicate zone id " + std::to_string(z.zone_id));
  }
  enum : int { kPlantSupply = 0, kSupplyHeader = 1, kReturnHeader = 2, kPlantReturn = 3 };
  std::vector<std::string> nodes{"plant_supply", "supply_header", "return_header", "plant_return"};
  std::vector<Branch> branches;
  int id = 0;
  branches.push_back({id++, kPlantReturn, kPlantSupply, 0.0, BranchKind::kPump, 0});
  branches.push_back({id++, kPlantSupply, kSupplyHeader, config.supply_main_resistance, BranchKind::kPipe, 0});
  branches.push_back({id++, kReturnHeader, kPlantReturn, config.return_main_resistance, BranchKind::kPipe, 0});
  for (const auto& z : zones) {
    branches.push_back({id++, kSupplyHeader, kReturnHeader, config.coil_resistance, BranchKind::kFcuCoil, z.zone_id});
  }
  branches.push_back({id++, kSupplyHeader, kReturnHeader, config.bypass_resistance, BranchKind::kBypass, 0});
  return NetworkTopology(std::move(nodes), std::move(branches));
}

HydraulicSolver::HydraulicSolver(NetworkTopology topology, PumpParams pump, double design_flow_m3_s)
    : topology_(std::move(topology)), pump_(pump), design_flow_(design_flow_m3_s) {
  pump_.validate();
  if (!(design_flow_ > 0.0)) throw ConfigError("design flow must be positive");
}

double HydraulicSolver::head_loss(const Branch& b, double q, double speed_sq, double* slope) const {
  if (b.kind == BranchKind::kPump) {
    *slope = -speed_sq * (2.0 * pump_.alpha1 * q + pump_.alpha2);
    return -speed_sq * pump_head_rated(q, pump_);
  }
  *slope = 2.0 * b.resistance * std::abs(q);
  return b.resistance * q * std::abs(q);
}

void HydraulicSolver::build_loops(const std::vector<bool>& conducting) {
  const auto& branches = topology_.branches();
  const int n = static_cast<int>(topology_.node_count());
  const int e = static_cast<int>(branches.size());
  const int root = branches[static_cast<std::size_t>(topology_.pump_branch())].upstream;

  parent_branch_.assign(static_cast<std::size_t>(n), -1);
  bfs_order_.clear();
  std::vector<char> in_tree(static_cast<std::size_t>(e), 0);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<int> queue{root};
  seen[static_cast<std::size_t>(root)] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    bfs_order_.push_back(u);
    for (int j = 0; j < e; ++j) {
      if (!conducting[static_cast<std::size_t>(j)]) continue;
      const Branch& b = branches[static_cast<std::size_t>(j)];
      int other = -1;
      if (b.upstream == u) other = b.downstream;
      else if (b.downstream == u) other = b.upstream;
      if (other < 0 || seen[static_cast<std::size_t>(other)]) continue;
      seen[static_cast<std::size_t>(other)] = 1;
      parent_branch_[static_cast<std::size_t>(other)] = j;
      in_tree[static_cast<std::size_t>(j)] = 1;
      queue.push_back(other);
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!seen[static_cast<std::size_t>(v)]) {
      throw TopologyError("node '" + topology_.node_names()[static_cast<std::size_t>(v)] +
                          "' is disconnected from the conducting network");
    }
  }

  auto parent_node = [&](int v) {
    const Branch& b = branches[static_cast<std::size_t>(parent_branch_[static_cast<std::size_t>(v)])];
    return b.upstream == v ? b.downstream : b.upstream;
  };
  auto path_to_root = [&](int v) {
    std::vector<int> path{v};
    while (v != root) {
      v = parent_node(v);
      path.push_back(v);
    }
    return path;
  };

  chords_.clear();
  for (int j = 0; j < e; ++j) {
    if (conducting[static_cast<std::size_t>(j)] && !in_tree[static_cast<std::size_t>(j)]) chords_.push_back(j);
  }
  loops_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(chords_.size()), e);
  for (std::size_t l = 0; l < chords_.size(); ++l) {
    const Branch& chord = branches[static_cast<std::size_t>(chords_[l])];
    const auto l_idx = static_cast<Eigen::Index>(l);
    loops_(l_idx, chords_[l]) = 1.0;
    // close the loop from the chord's downstream end back to its upstream end
    const auto down_path = path_to_root(chord.downstream);
    const auto up_path = path_to_root(chord.upstream);
    std::set<int> up_set(up_path.begin(), up_path.end());
    int lca = root;
    for (int v : down_path) {
      if (up_set.count(v)) {
        lca = v;
        break;
      }
    }
    for (int v = chord.downstream; v != lca; v = parent_node(v)) {
      const int j = parent_branch_[static_cast<std::size_t>(v)];
      loops_(l_idx, j) += branches[static_cast<std::size_t>(j)].upstream == v ? 1.0 : -1.0;
    }
    for (int v = chord.upstream; v != lca; v = parent_node(v)) {
      const int j = parent_branch_[static_cast<std::size_t>(v)];
      // traversed from parent(v) down to v
      loops_(l_idx, j) += branches[static_cast<std::size_t>(j)].upstream == v ? -1.0 : 1.0;
    }
  }
}

HydraulicSolution HydraulicSolver::solve(double pump_freq_Hz, const std::vector<bool>& valve_open, double tol_kPa) {
  const auto& branches = topology_.branches();
  const auto e = branches.size();
  const auto n = topology_.node_count();
  if (valve_open.size() != topology_.coil_branches().size()) {
    throw ConfigError("valve vector has " + std::to_string(valve_open.size()) + " entries for " +
                      std::to_string(topology_.coil_branches().size()) + " coils");
  }
  if (pump_freq_Hz != 0.0 && !(pump_freq_Hz >= pump_.min_freq_Hz && pump_freq_Hz <= pump_.max_freq_Hz)) {
    throw ConfigError("pump frequency outside admissible range");
  }

  HydraulicSolution sol;
  sol.branch_flows_m3_s.assign(e, 0.0);
  sol.node_pressures_kPa.assign(n, static_pressure_kPa);
  if (pump_freq_Hz == 0.0) return sol;

  std::vector<bool> conducting(e, true);
  for (std::size_t c = 0; c < valve_open.size(); ++c) {
    conducting[static_cast<std::size_t>(topology_.coil_branches()[c])] = valve_open[c];
  }
  build_loops(conducting);

  const double s = pump_freq_Hz / pump_.rated_freq_Hz;
  const double speed_sq = s * s;
  const auto loops = loops_.rows();
  if (loops == 0) throw TopologyError("conducting network has no closed loop through the pump");

  Eigen::VectorXd x = Eigen::VectorXd::Constant(loops, design_flow_ / static_cast<double>(loops));
  Eigen::VectorXd q(static_cast<Eigen::Index>(e));
  Eigen::VectorXd h(static_cast<Eigen::Index>(e));
  Eigen::VectorXd slope(static_cast<Eigen::Index>(e));

  auto evaluate = [&](const Eigen::VectorXd& loop_flows) {
    q.noalias() = loops_.transpose() * loop_flows;
    for (std::size_t j = 0; j < e; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (!conducting[j]) {
        q(jj) = 0.0;
        h(jj) = 0.0;
        slope(jj) = 0.0;
        continue;
      }
      double d = 0.0;
      h(jj) = head_loss(branches[j], q(jj), speed_sq, &d);
      slope(jj) = d;
    }
    return Eigen::VectorXd(loops_ * h);
  };

  Eigen::VectorXd residual = evaluate(x);
  double norm = residual.lpNorm<Eigen::Infinity>();
  int iter = 0;
  while (norm > tol_kPa) {
    if (iter >= max_iterations) {
      throw SolverError("hydraulic solve did not converge after " + std::to_string(iter) +
                            " iterations (residual " + std::to_string(norm) + " kPa)",
                        norm, iter);
    }
    ++iter;
    const Eigen::MatrixXd jac = loops_ * slope.asDiagonal() * loops_.transpose();
    const Eigen::VectorXd step = jac.partialPivLu().solve(-residual);
    if (!step.allFinite()) throw SolverError("singular hydraulic Jacobian", norm, iter);
    double damping = 1.0;
    Eigen::VectorXd trial = x + step;
    Eigen::VectorXd trial_res = evaluate(trial);
    double trial_norm = trial_res.lpNorm<Eigen::Infinity>();
    for (int halvings = 0; trial_norm > norm && halvings < 30; ++halvings) {
      damping *= 0.5;
      trial = x + damping * step;
      trial_res = evaluate(trial);
      trial_norm = trial_res.lpNorm<Eigen::Infinity>();
    }
    x = trial;
    residual = trial_res;
    norm = trial_norm;
  }
  // leave q/h/slope consistent with the accepted iterate
  residual = evaluate(x);
  norm = residual.lpNorm<Eigen::Infinity>();

  double max_flow = 0.0;
  for (std::size_t j = 0; j < e; ++j) {
    sol.branch_flows_m3_s[j] = conducting[j] ? q(static_cast<Eigen::Index>(j)) : 0.0;
    max_flow = std::max(max_flow, std::abs(sol.branch_flows_m3_s[j]));
  }
  const auto pump_idx = static_cast<std::size_t>(topology_.pump_branch());
  sol.pump_flow_m3_s = sol.branch_flows_m3_s[pump_idx];
  sol.pump_head_kPa = -h(static_cast<Eigen::Index>(pump_idx));
  sol.iterations = iter;
  sol.residual_kPa = norm;

  // nodal pressures along the spanning tree, pump inlet held at the static pressure
  for (int v : bfs_order_) {
    const int j = parent_branch_[static_cast<std::size_t>(v)];
    if (j < 0) continue;
    const Branch& b = branches[static_cast<std::size_t>(j)];
    const double loss = h(j);
    if (b.downstream == v) {
      sol.node_pressures_kPa[static_cast<std::size_t>(v)] = sol.node_pressures_kPa[static_cast<std::size_t>(b.upstream)] - loss;
    } else {
      sol.node_pressures_kPa[static_cast<std::size_t>(v)] = sol.node_pressures_kPa[static_cast<std::size_t>(b.downstream)] + loss;
    }
  }

  const auto& inc = topology_.incidence();
  double imbalance = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    double sum = 0.0;
    for (std::size_t j = 0; j < e; ++j) {
      sum += inc(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(j)) * sol.branch_flows_m3_s[j];
    }
    imbalance = std::max(imbalance, std::abs(sum));
  }
  sol.mass_imbalance = max_flow > 0.0 ? imbalance / max_flow : 0.0;
  return sol;
}

HydraulicSolution solve_flows(const NetworkTopology& topology, const PumpParams& pump, double pump_freq_Hz,
                              const std::vector<bool>& valve_open, double tol_kPa, double design_flow_m3_s,
                              double static_pressure_kPa) {
  HydraulicSolver solver(topology, pump, design_flow_m3_s);
  solver.static_pressure_kPa = static_pressure_kPa;
  return solver.solve(pump_freq_Hz, valve_open, tol_kPa);
}

CoilExchange coil_outlet_temp(double t_water_in_C, double t_air_C, double water_flow_m3_s, double effectiveness) {
  const double capacity_rate = kWaterDensity * kWaterCp * water_flow_m3_s;
  return {t_water_in_C + effectiveness * (t_air_C - t_water_in_C),
          effectiveness * capacity_rate * (t_air_C - t_water_in_C)};
}

WaterTemperatures propagate_temperatures(const NetworkTopology& topology, const HydraulicSolution& solution,
                                         std::span<const CoilState> coil_states, double supply_temp_C) {
  const auto& branches = topology.branches();
  const std::size_t e = branches.size();
  const std::size_t n = topology.node_count();
  if (coil_states.size() != topology.coil_branches().size()) {
    throw ConfigError("one coil state is required per coil branch");
  }
  WaterTemperatures out;
  out.node_C.assign(n, supply_temp_C);
  out.branch_inlet_C.assign(e, supply_temp_C);
  out.branch_outlet_C.assign(e, supply_temp_C);
  out.coil_q_W.assign(e, 0.0);
  out.supply_C = supply_temp_C;
  out.return_C = supply_temp_C;

  const auto pump = static_cast<std::size_t>(topology.pump_branch());
  if (solution.pump_flow_m3_s <= 0.0) return out;

  std::vector<int> coil_slot(e, -1);
  for (std::size_t c = 0; c < topology.coil_branches().size(); ++c) {
    coil_slot[static_cast<std::size_t>(topology.coil_branches()[c])] = static_cast<int>(c);
  }

  // flow-directed graph without the pump: (from, to) per branch
  std::vector<int> from(e, -1), to(e, -1);
  std::vector<int> indegree(n, 0);
  for (std::size_t j = 0; j < e; ++j) {
    const double q = solution.branch_flows_m3_s[j];
    if (j == pump || q == 0.0) continue;
    from[j] = q > 0.0 ? branches[j].upstream : branches[j].downstream;
    to[j] = q > 0.0 ? branches[j].downstream : branches[j].upstream;
    ++indegree[static_cast<std::size_t>(to[j])];
  }
  const int start = branches[pump].downstream;
  std::vector<double> inflow_heat(n, 0.0), inflow(n, 0.0);
  std::deque<int> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push_back(static_cast<int>(v));
  }
  std::size_t processed = 0;
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop_front();
    ++processed;
    const auto vi = static_cast<std::size_t>(v);
    if (v == start) out.node_C[vi] = supply_temp_C;
    else if (inflow[vi] > 0.0) out.node_C[vi] = inflow_heat[vi] / inflow[vi];
    for (std::size_t j = 0; j < e; ++j) {
      if (from[j] != v) continue;
      const double q = std::abs(solution.branch_flows_m3_s[j]);
      const double t_in = out.node_C[vi];
      double t_out = t_in;
      if (coil_slot[j] >= 0) {
        const auto& cs = coil_states[static_cast<std::size_t>(coil_slot[j])];
        const auto x = coil_outlet_temp(t_in, cs.t_air_C, q, cs.effectiveness);
        t_out = x.t_water_out_C;
        out.coil_q_W[j] = x.q_coil_W;
        out.total_coil_q_W += x.q_coil_W;
      }
      out.branch_inlet_C[j] = t_in;
      out.branch_outlet_C[j] = t_out;
      const auto w = static_cast<std::size_t>(to[j]);
      inflow[w] += q;
      inflow_heat[w] += q * t_out;
      if (--indegree[w] == 0) ready.push_back(to[j]);
    }
  }
  if (processed != n) throw TopologyError("flow field contains a cycle outside the pump branch");
  out.branch_inlet_C[pump] = out.node_C[static_cast<std::size_t>(branches[pump].upstream)];
  out.branch_outlet_C[pump] = supply_temp_C;
  out.return_C = out.node_C[static_cast<std::size_t>(branches[pump].upstream)];
  return out;
}

std::string format_solution(const NetworkTopology& topology, const HydraulicSolution& solution) {
  std::ostringstream os;
  char line[160];
  os << "branch  kind      from           to             flow_m3_s      \n";
  for (std::size_t j = 0; j < topology.branch_count(); ++j) {
    const auto& b = topology.branches()[j];
    std::snprintf(line, sizeof line, "%-7d %-9s %-14s %-14s %.6e\n", b.id, to_string(b.kind),
                  topology.node_names()[static_cast<std::size_t>(b.upstream)].c_str(),
                  topology.node_names()[static_cast<std::size_t>(b.downstream)].c_str(), solution.branch_flows_m3_s[j]);
    os << line;
  }
  os << "node            pressure_kPa\n";
  for (std::size_t v = 0; v < topology.node_count(); ++v) {
    std::snprintf(line, sizeof line, "%-15s %.4f\n", topology.node_names()[v].c_str(), solution.node_pressures_kPa[v]);
    os << line;
  }
  std::snprintf(line, sizeof line, "pump flow %.6e m3/s, head %.4f kPa, %d iterations, residual %.3e kPa\n",
                solution.pump_flow_m3_s, solution.pump_head_kPa, solution.iterations, solution.residual_kPa);
  os << line;
  return os.str();
}

}  // namespace hvacrl
