#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("hvacrl_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(HVACRL_CLI_PATH) + " --quiet " + args + " > " +
                          (scratch() / "last_stdout.txt").string() + " 2> " + (scratch() / "last_stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

fs::path small_config() {
  const fs::path p = scratch() / "small.json";
  if (!fs::exists(p)) {
    std::ofstream(p) << json{{"train", {{"episodes", 2}, {"hidden", {16, 16}}, {"warmup", 64}}},
                             {"demos", {{"days", 4}}},
                             {"evaluate", {{"episodes", 2}}}}
                            .dump();
  }
  return p;
}

std::string out(const std::string& name) { return "--out " + (scratch() / name).string(); }

}  // namespace

TEST(Cli, SimulateWritesTrajectoriesReproducibly) {
  ASSERT_EQ(run("simulate --policy rule_based --seed 0 " + out("sim_a")), 0);
  ASSERT_EQ(run("simulate --policy rule_based --seed 0 " + out("sim_b")), 0);
  for (const char* f : {"trajectory.csv", "metrics.csv", "zone_1.csv", "zone_7.csv"}) {
    EXPECT_EQ(slurp(scratch() / "sim_a" / f), slurp(scratch() / "sim_b" / f)) << f;
  }
  const auto zone = read_csv(scratch() / "sim_a" / "zone_6.csv");
  EXPECT_EQ(zone.size(), 121u);
  const auto traj = read_csv(scratch() / "sim_a" / "trajectory.csv");
  ASSERT_EQ(traj.size(), 121u);
  // occupancy columns follow step, time, outdoor and seven temperatures
  auto occupants = [&](std::size_t row) {
    int n = 0;
    for (std::size_t c = 10; c < 17; ++c) n += std::stoi(traj[row][c]);
    return n;
  };
  int lunch = 0, morning = 0;
  for (std::size_t r = 1; r < traj.size(); ++r) {
    const std::string& t = traj[r][1];
    if (t >= "12:30" && t < "13:30") lunch = std::max(lunch, occupants(r));
    if (t >= "10:00" && t < "11:00") morning = std::max(morning, occupants(r));
  }
  EXPECT_LT(lunch, morning);
  EXPECT_TRUE(fs::exists(scratch() / "sim_a" / "manifest.json"));
  const json m = json::parse(slurp(scratch() / "sim_a" / "manifest.json"));
  EXPECT_EQ(m.at("command"), "simulate");
  EXPECT_EQ(m.at("seeds"), json::array({0}));
  EXPECT_TRUE(m.contains("config"));
}

TEST(Cli, DemosAndSftExport) {
  ASSERT_EQ(run("demos --days 16 " + out("demos")), 0);
  EXPECT_EQ(read_csv(scratch() / "demos" / "demos.csv").size(), 1921u);
  ASSERT_EQ(run("--config " + small_config().string() + " export-sft " + out("sft")), 0);
  const json m = json::parse(slurp(scratch() / "sft" / "manifest.json"));
  EXPECT_EQ(m.at("records"), m.at("eligible_steps"));
  std::ifstream in(scratch() / "sft" / "sft.jsonl");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, m.at("records").get<std::size_t>());
}

TEST(Cli, TrainVanillaWithoutDemonstrations) {
  ASSERT_EQ(run("--config " + small_config().string() + " train --variant vanilla --seeds 0,1,2 " + out("train")), 0);
  for (int s = 0; s < 3; ++s) {
    EXPECT_EQ(read_csv(scratch() / "train" / ("curve_seed" + std::to_string(s) + ".csv")).size(), 3u);
    EXPECT_TRUE(fs::exists(scratch() / "train" / ("qnet_seed" + std::to_string(s) + ".bin")));
  }
  const json summary = json::parse(slurp(scratch() / "train" / "summary.json"));
  EXPECT_TRUE(summary.contains("auc_mean"));
  EXPECT_TRUE(summary.contains("terminal_std"));
  EXPECT_EQ(read_csv(scratch() / "train" / "curve.csv").size(), 3u);

  ASSERT_EQ(run("--config " + small_config().string() + " evaluate --policy greedy --mask full --checkpoint " +
                (scratch() / "train" / "qnet_seed0.bin").string() + " " + out("greedy")),
            0);
  EXPECT_TRUE(fs::exists(scratch() / "greedy" / "report.json"));
}

TEST(Cli, EvaluateAndCompare) {
  const std::string cfg = "--config " + small_config().string();
  ASSERT_EQ(run(cfg + " evaluate --policy full_random " + out("ev_full")), 0);
  ASSERT_EQ(run(cfg + " evaluate --policy masked_random " + out("ev_masked")), 0);
  const std::string a = (scratch() / "ev_full").string();
  const std::string b = (scratch() / "ev_masked").string();
  ASSERT_EQ(run("compare " + a + " " + b + " " + out("cmp")), 0);
  const auto rows = read_csv(scratch() / "cmp" / "compare.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].back(), "delta_reward_pct");
  ASSERT_EQ(run("compare " + a + " " + a + " " + out("cmp_self")), 0);
  for (const auto& row : read_csv(scratch() / "cmp_self" / "compare.csv")) {
    if (row[0] == "run") continue;
    for (std::size_t c = row.size() - 4; c < row.size(); ++c) EXPECT_EQ(std::stod(row[c]), 0.0);
  }
  const std::string table = slurp(scratch() / "cmp" / "compare.txt");
  EXPECT_NE(table.find("Valid Actions"), std::string::npos);
}

TEST(Cli, CacheBench) {
  ASSERT_EQ(run("--config " + small_config().string() + " cache-bench " + out("bench")), 0);
  const auto rows = read_csv(scratch() / "bench" / "cache_bench.csv");
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t r = 1; r < 3; ++r) {
    EXPECT_EQ(rows[r][1], "120");
    const double hit = std::stod(rows[r][6]);
    EXPECT_GE(hit, 0.0);
    EXPECT_LE(hit, 100.0);
  }
}

TEST(Cli, ErrorsExitNonZero) {
  EXPECT_NE(run("simulate --policy nonsense " + out("bad1")), 0);
  EXPECT_NE(run("compare " + (scratch() / "sim_missing").string() + " " + (scratch() / "sim_a").string() + " " +
                out("bad2")),
            0);
  EXPECT_NE(run("--config /nonexistent.json print-config"), 0);
  const fs::path bad = scratch() / "typo.json";
  std::ofstream(bad) << R"({"trian": {}})";
  EXPECT_NE(run("--config " + bad.string() + " print-config"), 0);
  EXPECT_NE(slurp(scratch() / "last_stderr.txt").find("trian"), std::string::npos);
  EXPECT_NE(run("frobnicate"), 0);
}

TEST(Cli, PrintConfigRoundTrips) {
  ASSERT_EQ(std::system((std::string(HVACRL_CLI_PATH) + " print-config > " + (scratch() / "cfg.json").string()).c_str()),
            0);
  const json cfg = json::parse(slurp(scratch() / "cfg.json"));
  EXPECT_EQ(cfg.at("knn").at("k"), 50);
  EXPECT_EQ(run("--config " + (scratch() / "cfg.json").string() + " print-config"), 0);
}
