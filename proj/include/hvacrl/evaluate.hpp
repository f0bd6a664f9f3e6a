#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "hvacrl/dqn.hpp"
#include "hvacrl/features.hpp"
#include "hvacrl/mask_source.hpp"
#include "hvacrl/qnetwork.hpp"

namespace hvacrl {

enum class PolicyKind { kFullRandom, kMaskedRandom, kRuleBased };

PolicyKind parse_policy_kind(const std::string& name);
std::string to_string(PolicyKind kind);

/// Maps the current state and its mask to a joint action.
using Policy = std::function<JointAction(const BuildingState&, const ActionMask&, std::mt19937_64&)>;

/// full_random ignores the mask; masked_random draws uniformly from its set
/// bits; rule_based is the demonstration rule without noise.
Policy baseline_policy(PolicyKind kind, const Scenario& scenario);

/// Epsilon = 0 masked argmax of a trained network.
Policy greedy_policy(std::shared_ptr<const QNetwork> net, FeatureScaler scaler, double penalty = 1e9);

struct StepRecord {
  int step = 0;
  BuildingState state;
  JointAction action;
  FeasibleSets sets;
  int joint_count = 0;
  StepResult result;
};

using StepObserver = std::function<void(const StepRecord&)>;

struct EpisodeMetrics {
  std::uint64_t seed = 0;
  double reward = 0.0;
  double ppd_mean = 0.0;  // over occupied steps
  double pmv_abs_mean = 0.0;
  double energy_kWh = 0.0;
  double remaining_avg_pct = 0.0;
  int steps = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
};

MeanStd mean_std(const std::vector<double>& values);

/// Pruning statistics over every step of every episode.
struct RemainingStats {
  double max_pct = 0.0;
  int max_count = 0;
  double min_pct = 0.0;
  int min_count = 0;
  double avg_pct = 0.0;
  double avg_count = 0.0;
};

struct EvalReport {
  std::string label;
  std::vector<EpisodeMetrics> episodes;
  MeanStd reward, ppd, pmv, energy;
  RemainingStats remaining;
};

/// Rolls `policy` once per seed. A null mask source means the all-ones mask.
/// The policy's random stream is derived from the episode seed.
EvalReport evaluate(const Policy& policy, const Scenario& scenario, MaskSource* masks,
                    const std::vector<std::uint64_t>& seeds, const std::string& label = "",
                    const StepObserver& observer = {});

/// Improvement of `candidate` over `baseline` in percent; positive is better
/// for every field (less energy, lower |PMV| and PPD, higher reward).
struct RelativeDeltas {
  double energy_pct = 0.0;
  double pmv_pct = 0.0;
  double ppd_pct = 0.0;
  double reward_pct = 0.0;
};

RelativeDeltas relative_deltas(const EvalReport& baseline, const EvalReport& candidate);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& doc);

/// Aligned text table; deltas are relative to the first report.
void print_comparison(std::ostream& out, const std::vector<EvalReport>& reports);
void write_comparison_csv(std::ostream& out, const std::vector<EvalReport>& reports);
/// Maximum / Minimum / Average rows with percentages and valid-action counts.
void print_remaining_table(std::ostream& out, const RemainingStats& stats);

}  // namespace hvacrl
