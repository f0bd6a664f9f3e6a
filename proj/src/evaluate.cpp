#include "hvacrl/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "hvacrl/errors.hpp"

namespace hvacrl {

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "full_random") return PolicyKind::kFullRandom;
  if (name == "masked_random") return PolicyKind::kMaskedRandom;
  if (name == "rule_based") return PolicyKind::kRuleBased;
  throw ConfigError("unknown policy kind '" + name + "' (expected full_random, masked_random or rule_based)");
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kFullRandom: return "full_random";
    case PolicyKind::kMaskedRandom: return "masked_random";
    case PolicyKind::kRuleBased: return "rule_based";
  }
  return "unknown";
}

Policy baseline_policy(PolicyKind kind, const Scenario& scenario) {
  switch (kind) {
    case PolicyKind::kFullRandom:
      return [](const BuildingState&, const ActionMask&, std::mt19937_64& rng) {
        return JointAction::from_index(std::uniform_int_distribution<int>(0, kActionCount - 1)(rng));
      };
    case PolicyKind::kMaskedRandom:
      return [](const BuildingState&, const ActionMask& mask, std::mt19937_64& rng) {
        const int count = static_cast<int>(mask.bits.count());
        if (count == 0) throw ConfigError("masked_random: empty mask");
        return JointAction::from_index(nth_allowed(mask, std::uniform_int_distribution<int>(0, count - 1)(rng)));
      };
    case PolicyKind::kRuleBased:
      return [rule = scenario.rule](const BuildingState& s, const ActionMask&, std::mt19937_64&) {
        return rule_action(s, rule);
      };
  }
  throw ConfigError("unknown policy kind");
}

Policy greedy_policy(std::shared_ptr<const QNetwork> net, FeatureScaler scaler, double penalty) {
  if (!net) throw ConfigError("greedy policy needs a network");
  return [net = std::move(net), scaler = std::move(scaler), penalty](const BuildingState& s, const ActionMask& mask,
                                                                       std::mt19937_64&) {
    const RawFeatures f = scaler.apply(s);
    return JointAction::from_index(argmax_index(masked_q(net->forward(f), mask, penalty)));
  };
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

EvalReport evaluate(const Policy& policy, const Scenario& scenario, MaskSource* masks,
                    const std::vector<std::uint64_t>& seeds, const std::string& label, const StepObserver& observer) {
  EvalReport report;
  report.label = label;
  Environment env(scenario);
  const ActionMask all = ActionMask::all_ones();
  int min_count = std::numeric_limits<int>::max();
  int max_count = 0;
  double count_sum = 0.0;
  std::int64_t total_steps = 0;

  for (std::uint64_t seed : seeds) {
    env.reset(seed);
    auto rng = make_rng(seed, 20);
    EpisodeMetrics em;
    em.seed = seed;
    int occupied = 0;
    double remaining = 0.0;
    while (!env.done()) {
      StepRecord rec;
      rec.step = env.step_index();
      rec.state = env.state();
      rec.sets = masks ? masks->feasible_sets(env.prompt_window()) : FeasibleSets::full();
      const ActionMask mask = masks ? joint_mask(rec.sets) : all;
      rec.joint_count = mask.joint_count;
      rec.action = policy(rec.state, mask, rng);
      rec.result = env.step(rec.action);

      const auto& m = rec.result.info.metrics;
      em.reward += rec.result.reward;
      em.energy_kWh += m.power_kW * scenario.control_interval_min / 60.0;
      if (m.occupants_total > 0) {
        em.ppd_mean += m.ppd_mean_pct;
        em.pmv_abs_mean += m.pmv_abs_mean;
        ++occupied;
      }
      remaining += remaining_percentage(mask);
      min_count = std::min(min_count, mask.joint_count);
      max_count = std::max(max_count, mask.joint_count);
      count_sum += mask.joint_count;
      ++total_steps;
      ++em.steps;
      if (observer) observer(rec);
    }
    if (occupied > 0) {
      em.ppd_mean /= occupied;
      em.pmv_abs_mean /= occupied;
    }
    em.remaining_avg_pct = em.steps ? remaining / em.steps : 0.0;
    report.episodes.push_back(em);
  }

  std::vector<double> r, p, v, e;
  for (const auto& em : report.episodes) {
    r.push_back(em.reward);
    p.push_back(em.ppd_mean);
    v.push_back(em.pmv_abs_mean);
    e.push_back(em.energy_kWh);
  }
  report.reward = mean_std(r);
  report.ppd = mean_std(p);
  report.pmv = mean_std(v);
  report.energy = mean_std(e);
  if (total_steps > 0) {
    auto& rs = report.remaining;
    rs.max_count = max_count;
    rs.min_count = min_count;
    rs.max_pct = remaining_percentage(max_count);
    rs.min_pct = remaining_percentage(min_count);
    rs.avg_count = count_sum / static_cast<double>(total_steps);
    rs.avg_pct = rs.avg_count / kActionCount * 100.0;
  }
  return report;
}

RelativeDeltas relative_deltas(const EvalReport& baseline, const EvalReport& candidate) {
  auto lower_better = [](double base, double cand) { return base != 0.0 ? (base - cand) / std::abs(base) * 100.0 : 0.0; };
  RelativeDeltas d;
  d.energy_pct = lower_better(baseline.energy.mean, candidate.energy.mean);
  d.pmv_pct = lower_better(baseline.pmv.mean, candidate.pmv.mean);
  d.ppd_pct = lower_better(baseline.ppd.mean, candidate.ppd.mean);
  d.reward_pct = baseline.reward.mean != 0.0
                     ? (candidate.reward.mean - baseline.reward.mean) / std::abs(baseline.reward.mean) * 100.0
                     : 0.0;
  return d;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json episodes = nlohmann::json::array();
  for (const auto& e : r.episodes) {
    episodes.push_back({{"seed", e.seed},
                        {"reward", e.reward},
                        {"ppd_mean", e.ppd_mean},
                        {"pmv_abs_mean", e.pmv_abs_mean},
                        {"energy_kWh", e.energy_kWh},
                        {"remaining_avg_pct", e.remaining_avg_pct},
                        {"steps", e.steps}});
  }
  auto ms = [](const MeanStd& m) { return nlohmann::json{{"mean", m.mean}, {"std", m.std}}; };
  const auto& rs = r.remaining;
  return {{"label", r.label},
          {"episodes", episodes},
          {"reward", ms(r.reward)},
          {"ppd", ms(r.ppd)},
          {"pmv", ms(r.pmv)},
          {"energy", ms(r.energy)},
          {"remaining",
           {{"max_pct", rs.max_pct},
            {"max_count", rs.max_count},
            {"min_pct", rs.min_pct},
            {"min_count", rs.min_count},
            {"avg_pct", rs.avg_pct},
            {"avg_count", rs.avg_count}}}};
}

EvalReport report_from_json(const nlohmann::json& doc) {
  EvalReport r;
  try {
    r.label = doc.at("label").get<std::string>();
    for (const auto& e : doc.at("episodes")) {
      EpisodeMetrics m;
      m.seed = e.at("seed").get<std::uint64_t>();
      m.reward = e.at("reward").get<double>();
      m.ppd_mean = e.at("ppd_mean").get<double>();
      m.pmv_abs_mean = e.at("pmv_abs_mean").get<double>();
      m.energy_kWh = e.at("energy_kWh").get<double>();
      m.remaining_avg_pct = e.at("remaining_avg_pct").get<double>();
      m.steps = e.at("steps").get<int>();
      r.episodes.push_back(m);
    }
    auto ms = [](const nlohmann::json& j) { return MeanStd{j.at("mean").get<double>(), j.at("std").get<double>()}; };
    r.reward = ms(doc.at("reward"));
    r.ppd = ms(doc.at("ppd"));
    r.pmv = ms(doc.at("pmv"));
    r.energy = ms(doc.at("energy"));
    const auto& rs = doc.at("remaining");
    r.remaining.max_pct = rs.at("max_pct").get<double>();
    r.remaining.max_count = rs.at("max_count").get<int>();
    r.remaining.min_pct = rs.at("min_pct").get<double>();
    r.remaining.min_count = rs.at("min_count").get<int>();
    r.remaining.avg_pct = rs.at("avg_pct").get<double>();
    r.remaining.avg_count = rs.at("avg_count").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("evaluation report: missing metrics (") + e.what() + ")");
  }
  return r;
}

void print_comparison(std::ostream& out, const std::vector<EvalReport>& reports) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-22s %20s %16s %10s %12s %9s %9s %9s\n", "run", "reward", "PPD mean (%)",
                "|PMV|", "energy kWh", "rem max%", "rem min%", "rem avg%");
  out << buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-22s %11.2f ± %6.2f %7.2f ± %5.2f %10.3f %12.2f %9.2f %9.2f %9.2f\n",
                  r.label.c_str(), r.reward.mean, r.reward.std, r.ppd.mean, r.ppd.std, r.pmv.mean, r.energy.mean,
                  r.remaining.max_pct, r.remaining.min_pct, r.remaining.avg_pct);
    out << buf;
  }
  if (reports.size() < 2) return;
  out << "\nimprovement over " << reports.front().label << " (positive is better)\n";
  std::snprintf(buf, sizeof buf, "%-22s %10s %10s %10s %10s\n", "run", "energy", "|PMV|", "PPD", "reward");
  out << buf;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto d = relative_deltas(reports.front(), reports[i]);
    std::snprintf(buf, sizeof buf, "%-22s %9.2f%% %9.2f%% %9.2f%% %9.2f%%\n", reports[i].label.c_str(), d.energy_pct,
                  d.pmv_pct, d.ppd_pct, d.reward_pct);
    out << buf;
  }
}

void write_comparison_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "run,episodes,reward_mean,reward_std,ppd_mean,ppd_std,pmv_abs_mean,energy_kWh_mean,energy_kWh_std,"
         "remaining_max_pct,remaining_max_count,remaining_min_pct,remaining_min_count,remaining_avg_pct,"
         "remaining_avg_count,delta_energy_pct,delta_pmv_pct,delta_ppd_pct,delta_reward_pct\n";
  char buf[1024];
  for (const auto& r : reports) {
    const auto d = relative_deltas(reports.front(), r);
    std::snprintf(buf, sizeof buf,
                  "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.4f,%d,%.4f,%d,%.4f,%.2f,%.4f,%.4f,%.4f,%.4f\n",
                  r.label.c_str(), r.episodes.size(), r.reward.mean, r.reward.std, r.ppd.mean, r.ppd.std, r.pmv.mean,
                  r.energy.mean, r.energy.std, r.remaining.max_pct, r.remaining.max_count, r.remaining.min_pct,
                  r.remaining.min_count, r.remaining.avg_pct, r.remaining.avg_count, d.energy_pct, d.pmv_pct,
                  d.ppd_pct, d.reward_pct);
    out << buf;
  }
}

void print_remaining_table(std::ostream& out, const RemainingStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %12s %14s\n", "Metric", "Remaining %", "Valid Actions");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-10s %11.2f%% %14d\n", "Maximum", s.max_pct, s.max_count);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-10s %11.2f%% %14d\n", "Minimum", s.min_pct, s.min_count);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-10s %11.2f%% %14.0f\n", "Average", s.avg_pct, s.avg_count);
  out << buf;
}

}  // namespace hvacrl
