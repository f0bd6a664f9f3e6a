#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "hvacrl/dqn.hpp"
#include "hvacrl/knn.hpp"
#include "hvacrl/mask_source.hpp"
#include "hvacrl/scenario.hpp"

namespace hvacrl {

/// Library version, also written into run manifests.
const char* version_string();

struct DemoConfig {
  int days = 16;
  std::uint64_t seed = 0;
  std::string path;  // existing log to use instead of generating one
};

struct EvalConfig {
  int episodes = 20;
  std::uint64_t first_seed = 0;
};

/// Everything a command needs; each section overlays the built-in defaults.
struct RunConfig {
  Scenario scenario = default_scenario();
  DemoConfig demos;
  KnnConfig knn;
  CacheKeyConfig cache;
  TrainConfig train;
  EvalConfig evaluate;
};

nlohmann::json to_json(const RunConfig& config);
/// Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& patch);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace hvacrl
