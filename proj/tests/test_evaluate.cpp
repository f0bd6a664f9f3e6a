#include <gtest/gtest.h>

#include <sstream>
#include <unordered_set>

#include "hvacrl/config.hpp"
#include "hvacrl/errors.hpp"
#include "hvacrl/evaluate.hpp"
#include "hvacrl/features.hpp"
#include "hvacrl/scenario.hpp"

using namespace hvacrl;
using nlohmann::json;

namespace {

BuildingState some_state() {
  Environment env(default_scenario());
  env.reset(1);
  for (int t = 0; t < 30; ++t) env.step(JointAction::all_off());
  return env.state();
}

}  // namespace

TEST(Baselines, FullRandomCoverage) {
  const Policy p = baseline_policy(PolicyKind::kFullRandom, default_scenario());
  const BuildingState s = some_state();
  const ActionMask all = ActionMask::all_ones();
  std::mt19937_64 rng(0);
  std::unordered_set<int> seen;
  for (int i = 0; i < 100000; ++i) seen.insert(p(s, all, rng).index());
  EXPECT_GT(static_cast<double>(seen.size()) / kActionCount, 0.99);
}

TEST(Baselines, MaskedRandomStaysInsideMask) {
  const Policy p = baseline_policy(PolicyKind::kMaskedRandom, default_scenario());
  const BuildingState s = some_state();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    FeasibleSets sets;
    for (auto& z : sets.per_zone) z = static_cast<std::uint8_t>(1 + rng() % 15);
    ASSERT_TRUE(sets.admits(p(s, joint_mask(sets), rng)));
  }
}

TEST(Baselines, RuleKeepsVacantZonesOff) {
  const Scenario sc = default_scenario();
  const Policy p = baseline_policy(PolicyKind::kRuleBased, sc);
  int checked = 0;
  evaluate(p, sc, nullptr, {0, 1, 2}, "rule", [&](const StepRecord& r) {
    for (int j = 0; j < kZones; ++j) {
      if (r.state.occupancy[static_cast<std::size_t>(j)] == 0) {
        EXPECT_EQ(r.action.level(j), 0);
        ++checked;
      }
    }
  });
  EXPECT_GT(checked, 0);
  EXPECT_THROW(parse_policy_kind("smart"), ConfigError);
  EXPECT_EQ(parse_policy_kind(to_string(PolicyKind::kMaskedRandom)), PolicyKind::kMaskedRandom);
}

TEST(Evaluate, DeterministicAndSelfDeltasZero) {
  const Scenario sc = default_scenario();
  const Policy p = baseline_policy(PolicyKind::kFullRandom, sc);
  const EvalReport a = evaluate(p, sc, nullptr, {3, 4}, "a");
  const EvalReport b = evaluate(p, sc, nullptr, {3, 4}, "b");
  EXPECT_EQ(a.reward.mean, b.reward.mean);
  EXPECT_EQ(a.energy.mean, b.energy.mean);
  EXPECT_EQ(a.episodes[1].steps, 120);
  const RelativeDeltas d = relative_deltas(a, b);
  EXPECT_EQ(d.energy_pct, 0.0);
  EXPECT_EQ(d.pmv_pct, 0.0);
  EXPECT_EQ(d.ppd_pct, 0.0);
  EXPECT_EQ(d.reward_pct, 0.0);
  EXPECT_EQ(a.remaining.avg_pct, 100.0);
  EXPECT_EQ(a.remaining.min_count, kActionCount);
}

TEST(Evaluate, DeltaSigns) {
  EvalReport base, better;
  base.reward.mean = -100;
  base.energy.mean = 10;
  base.ppd.mean = 20;
  base.pmv.mean = 0.5;
  better.reward.mean = -80;
  better.energy.mean = 9;
  better.ppd.mean = 15;
  better.pmv.mean = 0.4;
  const RelativeDeltas d = relative_deltas(base, better);
  EXPECT_DOUBLE_EQ(d.reward_pct, 20.0);
  EXPECT_DOUBLE_EQ(d.energy_pct, 10.0);
  EXPECT_DOUBLE_EQ(d.ppd_pct, 25.0);
  EXPECT_NEAR(d.pmv_pct, 20.0, 1e-12);
}

TEST(Evaluate, ReportJsonRoundTripAndTables) {
  const Scenario sc = default_scenario();
  const EvalReport r = evaluate(baseline_policy(PolicyKind::kRuleBased, sc), sc, nullptr, {5}, "rule");
  const EvalReport back = report_from_json(to_json(r));
  EXPECT_EQ(back.label, "rule");
  EXPECT_EQ(back.reward.mean, r.reward.mean);
  EXPECT_EQ(back.remaining.max_count, r.remaining.max_count);
  EXPECT_THROW(report_from_json(json{{"label", "x"}}), ConfigError);

  std::ostringstream table;
  print_remaining_table(table, r.remaining);
  EXPECT_NE(table.str().find("Maximum"), std::string::npos);
  EXPECT_NE(table.str().find("Average"), std::string::npos);
  EXPECT_NE(table.str().find("16384"), std::string::npos);
  std::ostringstream csv;
  write_comparison_csv(csv, {r, back});
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(Evaluate, MeanStd) {
  const MeanStd m = mean_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.std, 1.2909944487358056, 1e-12);
  EXPECT_EQ(mean_std({7.0}).std, 0.0);
}

TEST(Features, LayoutAndScaling) {
  const Scenario sc = default_scenario();
  BuildingState s = some_state();
  const RawFeatures raw = raw_features(s);
  EXPECT_EQ(raw[0], s.zone_temps_C[0]);
  EXPECT_EQ(raw[7], s.occupancy[0]);
  EXPECT_EQ(raw[14], s.outdoor_temp_C);
  EXPECT_NEAR(raw[22] * raw[22] + raw[23] * raw[23], 1.0, 1e-12);
  const FeatureScaler scaler = FeatureScaler::for_scenario(sc);
  for (double v : scaler.apply(s)) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  std::vector<RawFeatures> rows{raw, raw};
  rows[1][0] += 2.0;
  const FeatureScaler fitted = FeatureScaler::fit(rows);
  EXPECT_EQ(fitted.apply(rows[1])[0], 1.0);
  EXPECT_EQ(fitted.apply(rows[0])[5], 0.0);  // zero range
}

TEST(RunConfig, DefaultsAndOverrides) {
  const RunConfig d = run_config_from_json(json::object());
  EXPECT_EQ(d.knn.k, 50);
  EXPECT_EQ(d.train.episodes, 300);
  EXPECT_EQ(d.demos.days, 16);
  const RunConfig back = run_config_from_json(to_json(d));
  EXPECT_EQ(to_json(back), to_json(d));
  const RunConfig c = run_config_from_json({{"train", {{"episodes", 20}, {"learning_rate", 5e-4}}}, {"knn", {{"k", 30}}}});
  EXPECT_EQ(c.train.episodes, 20);
  EXPECT_EQ(c.train.adam.learning_rate, 5e-4);
  EXPECT_EQ(c.knn.k, 30);
  EXPECT_THROW(run_config_from_json({{"trian", json::object()}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"knn", {{"tau", 0.5}}}}), ConfigError);
  EXPECT_FALSE(std::string(version_string()).empty());
}
