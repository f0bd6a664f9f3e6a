#include "hvacrl/config.hpp"

#include <fstream>

#include "hvacrl/errors.hpp"

namespace hvacrl {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

const char* version_string() { return HVACRL_VERSION; }

json to_json(const RunConfig& c) {
  const auto& t = c.train;
  return {
      {"scenario", to_json(c.scenario)},
      {"demos", {{"days", c.demos.days}, {"seed", c.demos.seed}, {"path", c.demos.path}}},
      {"knn", {{"k", c.knn.k}, {"tau", c.knn.tau}, {"weights", c.knn.weights}}},
      {"cache",
       {{"temp_step_C", c.cache.temp_step_C},
        {"outdoor_step_C", c.cache.outdoor_step_C},
        {"clock_bucket_min", c.cache.clock_bucket_min}}},
      {"train",
       {{"gamma", t.gamma},
        {"learning_rate", t.adam.learning_rate},
        {"adam_beta1", t.adam.beta1},
        {"adam_beta2", t.adam.beta2},
        {"adam_epsilon", t.adam.epsilon},
        {"replay_capacity", t.replay_capacity},
        {"batch_size", t.batch_size},
        {"warmup", t.warmup},
        {"epsilon_start", t.epsilon_start},
        {"epsilon_end", t.epsilon_end},
        {"epsilon_decay_fraction", t.epsilon_decay_fraction},
        {"target_sync_every", t.target_sync_every},
        {"train_every", t.train_every},
        {"mask_penalty", t.mask_penalty},
        {"reward_scale", t.reward_scale},
        {"episodes", t.episodes},
        {"hidden", t.hidden},
        {"seed", t.seed}}},
      {"evaluate", {{"episodes", c.evaluate.episodes}, {"first_seed", c.evaluate.first_seed}}},
  };
}

RunConfig run_config_from_json(const json& patch) {
  if (!patch.is_object()) throw ConfigError("config must be a JSON object");
  const RunConfig defaults;
  const json reference = to_json(defaults);
  reject_unknown_keys(reference, patch);
  json j = reference;
  j.merge_patch(patch);

  RunConfig c;
  c.scenario = scenario_from_json(patch.contains("scenario") ? patch.at("scenario") : json::object());
  const json& d = j.at("demos");
  read(d, "days", c.demos.days);
  read(d, "seed", c.demos.seed);
  read(d, "path", c.demos.path);
  const json& k = j.at("knn");
  read(k, "k", c.knn.k);
  read(k, "tau", c.knn.tau);
  read(k, "weights", c.knn.weights);
  const json& ca = j.at("cache");
  read(ca, "temp_step_C", c.cache.temp_step_C);
  read(ca, "outdoor_step_C", c.cache.outdoor_step_C);
  read(ca, "clock_bucket_min", c.cache.clock_bucket_min);
  const json& t = j.at("train");
  read(t, "gamma", c.train.gamma);
  read(t, "learning_rate", c.train.adam.learning_rate);
  read(t, "adam_beta1", c.train.adam.beta1);
  read(t, "adam_beta2", c.train.adam.beta2);
  read(t, "adam_epsilon", c.train.adam.epsilon);
  read(t, "replay_capacity", c.train.replay_capacity);
  read(t, "batch_size", c.train.batch_size);
  read(t, "warmup", c.train.warmup);
  read(t, "epsilon_start", c.train.epsilon_start);
  read(t, "epsilon_end", c.train.epsilon_end);
  read(t, "epsilon_decay_fraction", c.train.epsilon_decay_fraction);
  read(t, "target_sync_every", c.train.target_sync_every);
  read(t, "train_every", c.train.train_every);
  read(t, "mask_penalty", c.train.mask_penalty);
  read(t, "reward_scale", c.train.reward_scale);
  read(t, "episodes", c.train.episodes);
  read(t, "hidden", c.train.hidden);
  read(t, "seed", c.train.seed);
  const json& e = j.at("evaluate");
  read(e, "episodes", c.evaluate.episodes);
  read(e, "first_seed", c.evaluate.first_seed);

  if (c.demos.days < 0) throw ConfigError("demos.days must be non-negative");
  if (c.evaluate.episodes <= 0) throw ConfigError("evaluate.episodes must be positive");
  c.knn.validate();
  c.train.validate();
  if (!(c.cache.temp_step_C > 0.0) || !(c.cache.outdoor_step_C > 0.0) || c.cache.clock_bucket_min <= 0) {
    throw ConfigError("cache steps must be positive");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace hvacrl
