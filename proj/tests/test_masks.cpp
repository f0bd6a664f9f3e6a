#include <gtest/gtest.h>

#include <json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "hvacrl/action.hpp"
#include "hvacrl/errors.hpp"
#include "hvacrl/knn.hpp"
#include "hvacrl/mask_source.hpp"
#include "hvacrl/prompt.hpp"
#include "hvacrl/scenario.hpp"
#include "hvacrl/sft_export.hpp"
#include "oracles.hpp"

using namespace hvacrl;
using nlohmann::json;

namespace {

FeasibleSets random_sets(std::mt19937_64& rng) {
  FeasibleSets s;
  for (auto& z : s.per_zone) z = static_cast<std::uint8_t>(1 + rng() % 15);
  return s;
}

const HistoricalLog& demo_log() {
  static const HistoricalLog log = generate_demonstrations(default_scenario(), 4, 0);
  return log;
}

std::shared_ptr<const KnnDataset> demo_data() {
  static const auto data = std::make_shared<const KnnDataset>(KnnDataset::from_log(demo_log()));
  return data;
}

StateWindow sample_window() {
  Environment env(default_scenario());
  env.reset(12);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 40; ++t) env.step(JointAction::from_index(static_cast<int>(rng() % kActionCount)));
  return env.prompt_window();
}

}  // namespace

TEST(JointAction, ExhaustiveBijection) {
  for (int a = 0; a < kActionCount; ++a) {
    const auto lv = decode_index(a);
    EXPECT_EQ(encode_levels(lv), a);
    EXPECT_EQ(JointAction::from_index(a).levels(), lv);
  }
  EXPECT_EQ(JointAction::from_index(1).level(0), 1);
  EXPECT_EQ(JointAction::from_index(4).level(1), 1);
  EXPECT_THROW(JointAction::from_index(kActionCount), ConfigError);
}

TEST(ActionMask, ProductLaw) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const FeasibleSets s = random_sets(rng);
    const ActionMask m = joint_mask(s);
    int product = 1;
    for (int j = 0; j < kZones; ++j) product *= s.size(j);
    ASSERT_EQ(static_cast<int>(m.bits.count()), product);
    ASSERT_EQ(m.joint_count, product);
    if (i < 20) ASSERT_EQ(oracle::count_admitted(s), product);
  }
}

TEST(ActionMask, Examples) {
  const ActionMask full = joint_mask(FeasibleSets::full());
  EXPECT_EQ(full.joint_count, kActionCount);
  EXPECT_TRUE(full.bits.all());
  FeasibleSets s;
  s.per_zone = {0b0001, 0b0011, 0b0110, 0b1000, 0b0111, 0b0100, 0b1001};
  EXPECT_EQ(joint_mask(s).joint_count, 24);
  FeasibleSets single;
  single.per_zone = {1, 2, 4, 8, 1, 2, 4};
  const ActionMask one = joint_mask(single);
  EXPECT_EQ(one.bits.count(), 1u);
  EXPECT_TRUE(one.allows(encode_levels({0, 1, 2, 3, 0, 1, 2})));
}

TEST(ActionMask, RemainingPercentage) {
  EXPECT_EQ(remaining_percentage(ActionMask::all_ones()), 100.0);
  EXPECT_NEAR(remaining_percentage(864), 5.27, 0.005);
  EXPECT_NEAR(remaining_percentage(6912), 42.19, 0.005);
  EXPECT_DOUBLE_EQ(remaining_percentage(3072), 18.75);
}

// -------------------------------------------------------------- kNN

TEST(Knn, WeightedDistance) {
  std::vector<double> a(24, 0.5), b(24, 0.5), w(24, 1.0);
  EXPECT_EQ(weighted_distance(a, b, w), 0.0);
  b[0] += 3.0;
  b[1] += 4.0;
  EXPECT_DOUBLE_EQ(weighted_distance(a, b, w), 5.0);
  w[1] = 0.0;
  EXPECT_DOUBLE_EQ(weighted_distance(a, b, w), 3.0);
  EXPECT_THROW(weighted_distance(a, std::vector<double>(3), w), ConfigError);
}

TEST(Knn, ConfigValidation) {
  KnnConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tau = 0.3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.weights = {1.0, 2.0};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Knn, FrequencyExamples) {
  const FeatureScaler scaler;
  std::vector<RawFeatures> feats(60);
  std::vector<JointAction::Levels> acts(60);
  for (int i = 0; i < 60; ++i) {
    feats[static_cast<std::size_t>(i)].fill(i * 0.01);
    acts[static_cast<std::size_t>(i)].fill(static_cast<std::uint8_t>(i % 4));
    acts[static_cast<std::size_t>(i)][0] = 2;
  }
  const KnnDataset data(scaler, feats, acts);
  KnnConfig c;
  c.k = 40;
  const auto sets = knn_feasible_sets(data, std::vector<double>(24, 0.0), c);
  EXPECT_EQ(sets.per_zone[0], 0b0100);
  EXPECT_EQ(sets.per_zone[1], 0b1111);
}

TEST(Knn, MatchesExhaustiveScan) {
  const auto data = demo_data();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.1, 1.1);
  KnnConfig c;
  for (int q = 0; q < 50; ++q) {
    std::vector<double> query(24);
    for (double& x : query) x = u(rng);
    const auto got = knn_neighbors(*data, query, c);
    const auto ref = oracle::exhaustive_knn(*data, query, c);
    ASSERT_EQ(got.size(), ref.rows.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].row, ref.rows[i]);
      EXPECT_EQ(got[i].distance, ref.distances[i]);
    }
    EXPECT_EQ(knn_feasible_sets(*data, query, c), ref.sets);
    EXPECT_TRUE(ref.sets.valid());
  }
}

TEST(Knn, TiesFollowRowOrder) {
  std::vector<RawFeatures> feats(10);
  std::vector<JointAction::Levels> acts(10);
  for (std::size_t i = 0; i < 10; ++i) acts[i].fill(static_cast<std::uint8_t>(i < 5 ? 1 : 3));
  const KnnDataset data(FeatureScaler(), feats, acts);
  KnnConfig c;
  c.k = 5;
  const auto nn = knn_neighbors(data, std::vector<double>(24, 0.0), c);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(nn[i].row, i);
  EXPECT_EQ(knn_feasible_sets(data, std::vector<double>(24, 0.0), c).per_zone[3], 0b0010);
}

TEST(Knn, ThresholdMonotone) {
  const auto data = demo_data();
  std::mt19937_64 rng(8);
  for (int q = 0; q < 30; ++q) {
    std::vector<double> query(24);
    for (double& x : query) x = std::uniform_real_distribution<double>(0, 1)(rng);
    FeasibleSets prev{};
    for (double tau : {0.25, 0.2, 0.1, 0.05, 0.02}) {
      KnnConfig c;
      c.tau = tau;
      const auto s = knn_feasible_sets(*data, query, c);
      EXPECT_TRUE(s.valid());
      for (int j = 0; j < kZones; ++j) {
        EXPECT_EQ(s.per_zone[static_cast<std::size_t>(j)] & prev.per_zone[static_cast<std::size_t>(j)],
                  prev.per_zone[static_cast<std::size_t>(j)]);
      }
      prev = s;
    }
  }
}

// -------------------------------------------------------------- cache

TEST(Cache, KeyDiscretisation) {
  BuildingState s = sample_window().back();
  const CacheKeyConfig cfg;
  s.zone_temps_C[2] = 25.12;
  BuildingState t = s;
  t.zone_temps_C[2] = 25.22;
  EXPECT_EQ(cache_key(s, cfg), cache_key(t, cfg));
  t.zone_temps_C[2] = 25.52;
  EXPECT_FALSE(cache_key(s, cfg) == cache_key(t, cfg));
  t = s;
  t.occupancy[0] += 1;
  EXPECT_FALSE(cache_key(s, cfg) == cache_key(t, cfg));
  const BuildingState rep = bucket_representative(cache_key(s, cfg), cfg);
  EXPECT_EQ(cache_key(rep, cfg), cache_key(s, cfg));
  EXPECT_DOUBLE_EQ(rep.zone_temps_C[2], 25.25);
}

TEST(Cache, HitsMissesAndTransparency) {
  auto knn = std::make_shared<KnnMaskSource>(demo_data(), KnnConfig{});
  CachedMaskSource cache(knn);
  const StateWindow w = sample_window();
  const FeasibleSets first = cache.feasible_sets(w);
  EXPECT_EQ(cache.misses(), 1);
  EXPECT_EQ(cache.hits(), 0);
  const FeasibleSets second = cache.feasible_sets(w);
  EXPECT_EQ(first, second);
  EXPECT_EQ(cache.hits(), 1);
  EXPECT_DOUBLE_EQ(cache.hit_rate(), 0.5);

  const BuildingState rep = bucket_representative(cache_key(w.back(), cache.config()), cache.config());
  EXPECT_EQ(first, knn->sets_for(rep));
  // a state that is its own representative sees exactly the provider's answer
  CachedMaskSource fresh(knn);
  EXPECT_EQ(fresh.feasible_sets(constant_window(rep)), knn->feasible_sets(constant_window(rep)));
  cache.reset_counters();
  EXPECT_EQ(cache.hits() + cache.misses(), 0);
  EXPECT_EQ(cache.size(), 1u);
}

TEST(Cache, ConcurrentLookups) {
  auto knn = std::make_shared<KnnMaskSource>(demo_data(), KnnConfig{});
  CachedMaskSource cache(knn);
  const auto demos = to_demonstrations(demo_log());
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = 0; i < 200; ++i) cache.lookup(demos[(i + 50 * static_cast<std::size_t>(t)) % 200].state);
    });
  }
  for (auto& th : pool) th.join();
  EXPECT_EQ(cache.hits() + cache.misses(), 800);
  EXPECT_GE(cache.hits(), 800 - 4 * static_cast<std::int64_t>(cache.size()));
  for (std::size_t i = 0; i < 200; ++i) {
    const auto key = cache_key(demos[i].state, cache.config());
    EXPECT_EQ(cache.lookup(demos[i].state), knn->sets_for(bucket_representative(key, cache.config())));
  }
}

// -------------------------------------------------------------- prompt codec

TEST(Prompt, SerialisationIsCompleteAndStable) {
  const StateWindow w = sample_window();
  const std::string a = serialize_prompt(w);
  EXPECT_EQ(a, serialize_prompt(w));
  EXPECT_NE(a.find("\"analysis\""), std::string::npos);
  EXPECT_NE(a.find("\"recommendations\""), std::string::npos);
  EXPECT_NE(a.find("t-4:"), std::string::npos);
  EXPECT_THROW(serialize_prompt(std::span<const BuildingState>(w.data(), 4)), ConfigError);
  const BuildingState back = current_state_from_prompt(a);
  EXPECT_EQ(back.occupancy, w.back().occupancy);
  EXPECT_EQ(back.clock_min, w.back().clock_min);
  for (int j = 0; j < kZones; ++j) {
    EXPECT_NEAR(back.zone_temps_C[static_cast<std::size_t>(j)], w.back().zone_temps_C[static_cast<std::size_t>(j)],
                0.01);
  }
}

namespace {

RecommendationError::Kind kind_of(const std::string& text) {
  try {
    parse_recommendations(text);
  } catch (const RecommendationError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << text;
  return RecommendationError::Kind::kMalformed;
}

json good_reply() {
  json r = {{"analysis", "ignored"}, {"recommendations", json::object()}};
  for (int j = 1; j <= 7; ++j) r["recommendations"]["zone_" + std::to_string(j)] = {0, 1};
  r["recommendations"]["zone_7"] = {2};
  return r;
}

}  // namespace

TEST(Prompt, ParseRecommendations) {
  const FeasibleSets s = parse_recommendations(good_reply().dump());
  EXPECT_EQ(s.per_zone[0], 0b0011);
  EXPECT_EQ(s.per_zone[6], 0b0100);

  json missing = good_reply();
  missing["recommendations"].erase("zone_4");
  EXPECT_EQ(kind_of(missing.dump()), RecommendationError::Kind::kMissingZone);
  json range = good_reply();
  range["recommendations"]["zone_2"] = {5};
  EXPECT_EQ(kind_of(range.dump()), RecommendationError::Kind::kOutOfRange);
  json empty = good_reply();
  empty["recommendations"]["zone_3"] = json::array();
  EXPECT_EQ(kind_of(empty.dump()), RecommendationError::Kind::kEmptySet);
  EXPECT_EQ(kind_of("{not json"), RecommendationError::Kind::kMalformed);
  EXPECT_EQ(kind_of(R"({"analysis":"x"})"), RecommendationError::Kind::kMalformed);
}

TEST(Prompt, FallbackIsPerZone) {
  json r = good_reply();
  r["recommendations"]["zone_2"] = {9};
  std::vector<std::string> warnings;
  const FeasibleSets s = parse_recommendations_or_full(r.dump(), &warnings);
  EXPECT_EQ(s.per_zone[1], 0b1111);
  EXPECT_EQ(s.per_zone[0], 0b0011);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ(parse_recommendations_or_full("garbage", nullptr), FeasibleSets::full());
}

TEST(Prompt, PromptedSourceMatchesKnn) {
  auto knn = std::make_shared<KnnMaskSource>(demo_data(), KnnConfig{});
  PromptedMaskSource prompted(knn_completion(knn));
  const StateWindow w = sample_window();
  EXPECT_EQ(prompted.feasible_sets(w), knn->feasible_sets(w));
  EXPECT_EQ(prompted.fallbacks(), 0);

  PromptedMaskSource broken([](const std::string&) { return std::string("sorry"); });
  EXPECT_EQ(broken.feasible_sets(w), FeasibleSets::full());
  EXPECT_EQ(broken.fallbacks(), 1);
}

// -------------------------------------------------------------- SFT export

TEST(Sft, RecordsRoundTrip) {
  const HistoricalLog& log = demo_log();
  const auto records = build_sft_records(log, KnnConfig{});
  const auto ok = eligible_rows(log);
  EXPECT_EQ(records.size(), static_cast<std::size_t>(std::count(ok.begin(), ok.end(), true)));
  EXPECT_EQ(records.size(), 4u * (120u - 4u));

  std::ostringstream out;
  EXPECT_EQ(export_sft_dataset(log, KnnConfig{}, out), records.size());
  std::istringstream in(out.str());
  std::size_t i = 0;
  for (std::string line; std::getline(in, line); ++i) {
    const json doc = json::parse(line);
    EXPECT_EQ(doc.size(), 2u);
    EXPECT_EQ(doc.at("input").get<std::string>(), records[i].input);
    EXPECT_EQ(parse_recommendations(doc.at("target").dump()), records[i].sets);
  }
  EXPECT_EQ(i, records.size());
}

TEST(Sft, BinaryLabelsAndLimits) {
  FeasibleSets s;
  s.per_zone = {1, 3, 7, 15, 8, 12, 5};
  const auto y = binary_labels(s);
  for (int j = 0; j < kZones; ++j) {
    for (int l = 0; l < 4; ++l) EXPECT_EQ(y[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] == 1, s.contains(j, l));
  }
  HistoricalLog tiny;
  tiny.rows.assign(demo_log().rows.begin(), demo_log().rows.begin() + 40);
  EXPECT_THROW(build_sft_records(tiny, KnnConfig{}), DataError);
}

TEST(Sft, AnalysisTemplate) {
  const StateWindow w = sample_window();
  FeasibleSets s = FeasibleSets::full();
  s.per_zone[0] = 0b0001;
  const std::string text = analysis_text(w, s);
  EXPECT_NE(text.find("3 of 28 zone fan modes are ruled out"), std::string::npos) << text;
  EXPECT_NE(text.find(std::to_string(w.back().occupants_total()) + " occupants"), std::string::npos) << text;
}
