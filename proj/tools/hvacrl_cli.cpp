// Command-line front end: simulation, demonstrations, SFT export, training,
// evaluation, comparison and the mask-cache benchmark.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hvacrl/cache_bench.hpp"
#include "hvacrl/config.hpp"
#include "hvacrl/dqn.hpp"
#include "hvacrl/errors.hpp"
#include "hvacrl/evaluate.hpp"
#include "hvacrl/historical_log.hpp"
#include "hvacrl/knn.hpp"
#include "hvacrl/prompt.hpp"
#include "hvacrl/sft_export.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hvacrl;

namespace {

constexpr const char* kOutEnv = "HVACRL_OUT";

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
  std::string argv;
};

class Run {
 public:
  Run(const Globals& g, std::string command, const RunConfig& config, std::uint64_t seed)
      : g_(g), command_(std::move(command)), config_(config), started_(std::chrono::steady_clock::now()) {
    if (!g.out.empty()) {
      dir_ = g.out;
    } else {
      const char* root = std::getenv(kOutEnv);
      dir_ = fs::path(root && *root ? root : "runs") / (command_ + "-seed" + std::to_string(seed));
    }
    fs::create_directories(dir_);
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    started_utc_ = buf;
  }

  const fs::path& dir() const { return dir_; }
  fs::path file(const std::string& name) const { return dir_ / name; }
  void note(const std::string& key, json value) { extra_[key] = std::move(value); }

  void finish(const std::vector<std::uint64_t>& seeds) const {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    json m;
    m["command"] = command_;
    m["argv"] = g_.argv;
    m["config_path"] = g_.config_path;
    m["config"] = to_json(config_);
    m["seeds"] = seeds;
    m["version"] = version_string();
    m["output_dir"] = dir_.string();
    m["started_utc"] = started_utc_;
    m["wall_seconds"] = wall;
    for (auto it = extra_.begin(); it != extra_.end(); ++it) m[it.key()] = it.value();
    std::ofstream out(file("manifest.json"));
    out << m.dump(2) << "\n";
    if (!out) throw ConfigError("cannot write manifest in " + dir_.string());
  }

 private:
  const Globals& g_;
  std::string command_;
  RunConfig config_;
  fs::path dir_;
  std::string started_utc_;
  std::chrono::steady_clock::time_point started_;
  json extra_ = json::object();
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << std::setprecision(10);
  return out;
}

void say(const Globals& g, const std::string& text) {
  if (!g.quiet) std::cout << text << std::flush;
}

RunConfig resolve_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? run_config_from_json(json::object()) : load_run_config(g.config_path);
  if (g.seed) {
    c.scenario.seed = *g.seed;
    c.train.seed = *g.seed;
    c.evaluate.first_seed = *g.seed;
  }
  return c;
}

HistoricalLog obtain_demos(const RunConfig& c, const std::string& path_flag) {
  const std::string path = path_flag.empty() ? c.demos.path : path_flag;
  if (!path.empty()) return load_historical(path);
  return generate_demonstrations(c.scenario, c.demos.days, c.demos.seed);
}

std::shared_ptr<MaskSource> make_mask_source(const std::string& kind, const RunConfig& c,
                                             const std::string& demos_flag) {
  if (kind == "full") return std::make_shared<FullMaskSource>();
  const auto data = std::make_shared<const KnnDataset>(KnnDataset::from_log(obtain_demos(c, demos_flag)));
  auto knn = std::make_shared<KnnMaskSource>(data, c.knn);
  if (kind == "knn") return knn;
  auto prompted = std::make_shared<PromptedMaskSource>(knn_completion(knn));
  if (kind == "prompted") return prompted;
  if (kind == "cached") return std::make_shared<CachedMaskSource>(prompted, c.cache);
  throw ConfigError("unknown mask source '" + kind + "' (expected full, knn, prompted or cached)");
}

std::vector<std::uint64_t> eval_seeds(const RunConfig& c, int episodes) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < episodes; ++i) seeds.push_back(c.evaluate.first_seed + static_cast<std::uint64_t>(i));
  return seeds;
}

std::string clock_label(int clock_min) {
  const int m = kDayStartMinute + clock_min;
  std::ostringstream os;
  os << std::setw(2) << std::setfill('0') << m / 60 << ':' << std::setw(2) << std::setfill('0') << m % 60;
  return os.str();
}

// ---------------------------------------------------------------- simulate

struct PolicyChoice {
  std::string policy = "rule_based";
  std::string mask = "auto";
  std::string checkpoint;
  std::string demos;
};

Policy build_policy(const PolicyChoice& p, const RunConfig& c) {
  if (p.policy == "greedy") {
    if (p.checkpoint.empty()) throw ConfigError("policy greedy needs --checkpoint");
    auto net = std::make_shared<const QNetwork>(load_checkpoint(fs::path(p.checkpoint)));
    return greedy_policy(net, FeatureScaler::for_scenario(c.scenario), c.train.mask_penalty);
  }
  return baseline_policy(parse_policy_kind(p.policy), c.scenario);
}

std::string resolve_mask_kind(const PolicyChoice& p) {
  if (p.mask != "auto") return p.mask;
  if (p.policy == "masked_random") return "knn";
  if (p.policy == "greedy") throw ConfigError("policy greedy needs an explicit --mask (full for vanilla, knn for masked)");
  return "full";
}

int cmd_simulate(const Globals& g, const PolicyChoice& p) {
  const RunConfig c = resolve_config(g);
  const std::uint64_t seed = c.evaluate.first_seed;
  Run run(g, "simulate", c, seed);
  const std::string mask_kind = resolve_mask_kind(p);
  auto masks = make_mask_source(mask_kind, c, p.demos);
  const Policy policy = build_policy(p, c);

  auto traj = open_out(run.file("trajectory.csv"));
  traj << "step,time,outdoor_temp";
  for (const char* stem : {"zone_temp", "occupant_num", "FCU_fan"}) {
    for (int j = 1; j <= kZones; ++j) traj << ',' << stem << '_' << j;
  }
  traj << ",reward,ppd_mean,pmv_abs_mean,power_kW,pump_freq_Hz,valid_actions,remaining_pct\n";
  std::vector<std::ofstream> zones;
  for (int j = 1; j <= kZones; ++j) {
    zones.push_back(open_out(run.file("zone_" + std::to_string(j) + ".csv")));
    zones.back() << "step,time,zone_temp,occupant_num,FCU_fan,pmv,ppd,coil_load_W\n";
  }
  const StepObserver observer = [&](const StepRecord& r) {
    const auto& s = r.state;
    const auto& info = r.result.info;
    traj << r.step << ',' << clock_label(s.clock_min) << ',' << s.outdoor_temp_C;
    for (double t : s.zone_temps_C) traj << ',' << t;
    for (int n : s.occupancy) traj << ',' << n;
    for (int j = 0; j < kZones; ++j) traj << ',' << r.action.level(j);
    traj << ',' << r.result.reward << ',' << info.metrics.ppd_mean_pct << ',' << info.metrics.pmv_abs_mean << ','
         << info.metrics.power_kW << ',' << r.result.next.aux.pump_freq_Hz << ',' << r.joint_count << ','
         << remaining_percentage(r.joint_count) << '\n';
    for (std::size_t j = 0; j < zones.size(); ++j) {
      zones[j] << r.step << ',' << clock_label(s.clock_min) << ',' << s.zone_temps_C[j] << ',' << s.occupancy[j]
               << ',' << r.action.level(static_cast<int>(j)) << ',' << info.zone_pmv[j] << ',' << info.zone_ppd[j]
               << ',' << info.coil_load_W[j] << '\n';
    }
  };
  const EvalReport report = evaluate(policy, c.scenario, masks.get(), {seed}, p.policy, observer);
  const auto& e = report.episodes.front();
  auto metrics = open_out(run.file("metrics.csv"));
  metrics << "policy,mask,seed,steps,reward,ppd_mean,pmv_abs_mean,energy_kWh,remaining_avg_pct\n"
          << p.policy << ',' << mask_kind << ',' << seed << ',' << e.steps << ',' << e.reward << ',' << e.ppd_mean
          << ',' << e.pmv_abs_mean << ',' << e.energy_kWh << ',' << e.remaining_avg_pct << '\n';
  run.note("policy", p.policy);
  run.note("mask", mask_kind);
  run.finish({seed});
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << "simulate " << p.policy << " seed " << seed << ": " << e.steps
     << " steps, reward " << e.reward << ", PPD " << e.ppd_mean << "%, energy " << e.energy_kWh << " kWh -> "
     << run.dir().string() << "\n";
  say(g, os.str());
  return 0;
}

// ---------------------------------------------------------------- demos / export-sft

int cmd_demos(const Globals& g, std::optional<int> days) {
  RunConfig c = resolve_config(g);
  if (g.seed) c.demos.seed = *g.seed;
  if (days) c.demos.days = *days;
  Run run(g, "demos", c, c.demos.seed);
  const HistoricalLog log = generate_demonstrations(c.scenario, c.demos.days, c.demos.seed);
  save_historical(run.file("demos.csv"), log);
  run.note("rows", log.rows.size());
  run.finish({c.demos.seed});
  say(g, "wrote " + std::to_string(log.rows.size()) + " demonstration rows (" + std::to_string(c.demos.days) +
             " days) to " + run.file("demos.csv").string() + "\n");
  return 0;
}

int cmd_export_sft(const Globals& g, const std::string& demos_path) {
  RunConfig c = resolve_config(g);
  Run run(g, "export-sft", c, c.demos.seed);
  const HistoricalLog log = obtain_demos(c, demos_path);
  const auto eligible = eligible_rows(log);
  const auto eligible_count = std::count(eligible.begin(), eligible.end(), true);
  const std::size_t written = export_sft_dataset(log, c.knn, run.file("sft.jsonl"));

  // every exported target must parse back to the same sets
  std::ifstream in(run.file("sft.jsonl"));
  std::size_t parsed = 0;
  for (std::string line; std::getline(in, line);) {
    const json doc = json::parse(line);
    const FeasibleSets sets = parse_recommendations(doc.at("target").dump());
    if (!sets.valid()) throw DataError("exported record has an empty set", parsed + 1, "target");
    ++parsed;
  }
  if (parsed != written) throw DataError("re-parsed " + std::to_string(parsed) + " of " + std::to_string(written) +
                                             " records", parsed, "");
  run.note("records", written);
  run.note("eligible_steps", eligible_count);
  run.finish({c.demos.seed});
  say(g, "exported " + std::to_string(written) + " records (" + std::to_string(eligible_count) +
             " eligible steps, " + std::to_string(parsed) + " re-parsed) to " + run.file("sft.jsonl").string() + "\n");
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainChoice {
  std::string variant = "masked";
  std::string mask = "knn";
  std::vector<std::uint64_t> seeds;
  std::optional<int> episodes;
  std::string demos;
};

int cmd_train(const Globals& g, const TrainChoice& t) {
  RunConfig c = resolve_config(g);
  if (t.episodes) c.train.episodes = *t.episodes;
  c.train.validate();
  std::vector<std::uint64_t> seeds = t.seeds;
  if (seeds.empty()) seeds = {c.train.seed};
  if (t.variant != "masked" && t.variant != "vanilla") {
    throw ConfigError("unknown variant '" + t.variant + "' (expected masked or vanilla)");
  }
  Run run(g, "train-" + t.variant, c, seeds.front());
  std::shared_ptr<MaskSource> masks;
  if (t.variant == "masked") masks = make_mask_source(t.mask, c, t.demos);

  std::vector<std::vector<EpisodeRecord>> curves;
  auto summary = open_out(run.file("summary.csv"));
  summary << "variant,seed,episodes,final5_mean,auc,gradient_steps,target_syncs\n";
  std::vector<double> finals, aucs;
  for (std::uint64_t seed : seeds) {
    TrainConfig tc = c.train;
    tc.seed = seed;
    auto curve_csv = open_out(run.file("curve_seed" + std::to_string(seed) + ".csv"));
    curve_csv << "episode,env_seed,reward,ppd_mean,pmv_abs_mean,energy_kWh,epsilon,remaining_pct,mean_loss\n";
    const EpisodeCallback cb = [&](const EpisodeRecord& r, const QNetwork&) {
      curve_csv << r.episode << ',' << r.env_seed << ',' << r.reward << ',' << r.ppd_mean << ',' << r.pmv_abs_mean
                << ',' << r.energy_kWh << ',' << r.epsilon << ',' << r.remaining_pct << ',' << r.mean_loss << '\n';
      if ((r.episode + 1) % 10 == 0 || r.episode + 1 == tc.episodes) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(1) << "  [" << t.variant << " seed " << seed << "] episode "
           << r.episode + 1 << "/" << tc.episodes << " reward " << r.reward << " eps " << std::setprecision(3)
           << r.epsilon << "\n";
        say(g, os.str());
      }
    };
    const TrainResult res = t.variant == "masked" ? train(c.scenario, *masks, tc, cb) : train_unmasked(c.scenario, tc, cb);
    save_checkpoint(run.file("qnet_seed" + std::to_string(seed) + ".bin"), res.network);
    const double f5 = final_window_mean(res.curve);
    const double auc = curve_auc(res.curve);
    finals.push_back(f5);
    aucs.push_back(auc);
    summary << t.variant << ',' << seed << ',' << res.curve.size() << ',' << f5 << ',' << auc << ','
            << res.gradient_steps << ',' << res.target_syncs << '\n';
    curves.push_back(res.curve);
  }
  const MeanStd f = mean_std(finals);
  const MeanStd a = mean_std(aucs);
  summary << t.variant << ",pooled," << c.train.episodes << ',' << f.mean << ',' << a.mean << ",,\n";

  auto pooled = open_out(run.file("curve.csv"));
  pooled << "episode,mean_reward,std\n";
  for (std::size_t e = 0; e < curves.front().size(); ++e) {
    std::vector<double> v;
    for (const auto& cv : curves) v.push_back(cv[e].reward);
    const MeanStd ms = mean_std(v);
    pooled << e << ',' << ms.mean << ',' << ms.std << '\n';
  }
  json s = {{"variant", t.variant},
            {"mask_source", t.variant == "masked" ? t.mask : "full"},
            {"seeds", seeds},
            {"final5_mean", f.mean},
            {"terminal_std", f.std},
            {"auc_mean", a.mean},
            {"final5_per_seed", finals},
            {"auc_per_seed", aucs}};
  std::ofstream(run.file("summary.json")) << s.dump(2) << "\n";
  run.note("variant", t.variant);
  run.finish(seeds);
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << t.variant << ": final-5% mean " << f.mean << " (terminal std " << f.std
     << "), AUC " << a.mean << " -> " << run.dir().string() << "\n";
  say(g, os.str());
  return 0;
}

// ---------------------------------------------------------------- evaluate / compare

int cmd_evaluate(const Globals& g, const PolicyChoice& p, std::optional<int> episodes, std::string label) {
  RunConfig c = resolve_config(g);
  if (episodes) c.evaluate.episodes = *episodes;
  if (c.evaluate.episodes <= 0) throw ConfigError("episode count must be positive");
  const std::string mask_kind = resolve_mask_kind(p);
  if (label.empty()) label = p.policy + "/" + mask_kind;
  Run run(g, "evaluate-" + p.policy, c, c.evaluate.first_seed);
  auto masks = make_mask_source(mask_kind, c, p.demos);
  const Policy policy = build_policy(p, c);
  const auto seeds = eval_seeds(c, c.evaluate.episodes);
  const EvalReport report = evaluate(policy, c.scenario, masks.get(), seeds, label);

  auto ep = open_out(run.file("episodes.csv"));
  ep << "seed,reward,ppd_mean,pmv_abs_mean,energy_kWh,remaining_avg_pct,steps\n";
  for (const auto& e : report.episodes) {
    ep << e.seed << ',' << e.reward << ',' << e.ppd_mean << ',' << e.pmv_abs_mean << ',' << e.energy_kWh << ','
       << e.remaining_avg_pct << ',' << e.steps << '\n';
  }
  auto sum = open_out(run.file("summary.csv"));
  write_comparison_csv(sum, {report});
  auto rem = open_out(run.file("remaining.csv"));
  rem << "metric,remaining_pct,valid_actions\n"
      << "Maximum," << report.remaining.max_pct << ',' << report.remaining.max_count << '\n'
      << "Minimum," << report.remaining.min_pct << ',' << report.remaining.min_count << '\n'
      << "Average," << report.remaining.avg_pct << ',' << report.remaining.avg_count << '\n';
  std::ofstream(run.file("report.json")) << to_json(report).dump(2) << "\n";
  run.note("policy", p.policy);
  run.note("mask", mask_kind);
  run.finish(seeds);
  if (!g.quiet) {
    print_comparison(std::cout, {report});
    std::cout << "\n";
    print_remaining_table(std::cout, report.remaining);
    std::cout << "-> " << run.dir().string() << "\n";
  }
  return 0;
}

int cmd_compare(const Globals& g, const std::vector<std::string>& dirs) {
  if (dirs.size() < 2) throw ConfigError("compare needs at least two run directories");
  std::vector<EvalReport> reports;
  for (const auto& d : dirs) {
    const fs::path path = fs::path(d) / "report.json";
    std::ifstream in(path);
    if (!in) throw ConfigError("run '" + d + "' has no report.json (missing metrics)");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    reports.push_back(report_from_json(doc));
  }
  const RunConfig c = resolve_config(g);
  Globals local = g;
  if (local.out.empty()) {
    const char* root = std::getenv(kOutEnv);
    local.out = (fs::path(root && *root ? root : "runs") / "compare").string();
  }
  Run run(local, "compare", c, 0);
  auto csv = open_out(run.file("compare.csv"));
  write_comparison_csv(csv, reports);
  std::ostringstream table;
  print_comparison(table, reports);
  for (const auto& r : reports) {
    table << "\n" << r.label << "\n";
    print_remaining_table(table, r.remaining);
  }
  std::ofstream(run.file("compare.txt")) << table.str();
  run.note("inputs", dirs);
  run.finish({});
  say(g, table.str());
  return 0;
}

// ---------------------------------------------------------------- cache-bench

struct BenchChoice {
  int warm_days = 4;
  bool cold = false;
  std::string provider = "knn";
  std::string demos;
  std::string policy = "masked_random";
};

int cmd_cache_bench(const Globals& g, const BenchChoice& b) {
  RunConfig c = resolve_config(g);
  const std::uint64_t bench_seed = c.evaluate.first_seed;
  Run run(g, "cache-bench", c, bench_seed);
  if (b.provider != "knn" && b.provider != "prompted") {
    throw ConfigError("cache-bench provider must be knn or prompted");
  }
  auto provider = make_mask_source(b.provider, c, b.demos);
  const Policy controller = baseline_policy(parse_policy_kind(b.policy), c.scenario);
  std::vector<std::uint64_t> warm;
  if (!b.cold) {
    for (int d = 0; d < b.warm_days; ++d) warm.push_back(bench_seed + static_cast<std::uint64_t>(d));
  }
  const CacheBenchResult res = run_cache_bench(c.scenario, provider, c.cache, controller, bench_seed, warm);

  auto csv = open_out(run.file("cache_bench.csv"));
  csv << "mode,steps,total_ms,mean_ms,max_ms,min_ms,hit_rate_pct,episode_reward\n";
  for (const auto* row : {&res.uncached, &res.cached}) {
    csv << (row == &res.uncached ? "provider_every_step" : "cached") << ',' << row->steps << ',' << row->total_ms
        << ',' << row->mean_ms << ',' << row->max_ms << ',' << row->min_ms << ','
        << (row == &res.uncached ? 0.0 : row->hit_rate_pct) << ',' << row->episode_reward << '\n';
  }
  auto steps = open_out(run.file("cache_steps.csv"));
  steps << "step,provider_ms,cached_ms\n";
  for (std::size_t i = 0; i < res.uncached.step_ms.size() && i < res.cached.step_ms.size(); ++i) {
    steps << i << ',' << res.uncached.step_ms[i] << ',' << res.cached.step_ms[i] << '\n';
  }
  run.note("provider", b.provider);
  run.note("warm_seeds", warm);
  run.note("cache_entries", res.cache_entries);
  run.finish({bench_seed});
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << std::left << std::setw(22) << "mode" << std::right << std::setw(7)
     << "steps" << std::setw(12) << "total ms" << std::setw(11) << "mean ms" << std::setw(11) << "max ms"
     << std::setw(11) << "min ms" << std::setw(10) << "hit %" << std::setw(12) << "reward" << "\n";
  for (const auto* row : {&res.uncached, &res.cached}) {
    os << std::left << std::setw(22) << (row == &res.uncached ? "provider every step" : "cached") << std::right
       << std::setw(7) << row->steps << std::setw(12) << row->total_ms << std::setw(11) << row->mean_ms
       << std::setw(11) << row->max_ms << std::setw(11) << row->min_ms << std::setw(10) << std::setprecision(1)
       << (row == &res.uncached ? 0.0 : row->hit_rate_pct) << std::setw(12) << std::setprecision(2)
       << row->episode_reward << std::setprecision(4) << "\n";
  }
  const double reduction = res.uncached.mean_ms > 0 ? 100.0 * (1.0 - res.cached.mean_ms / res.uncached.mean_ms) : 0;
  os << std::setprecision(2) << "mean step latency reduced by " << reduction << "% -> " << run.dir().string() << "\n";
  say(g, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Masked deep Q-learning for multi-zone fan coil control"};
  app.require_subcommand(1);
  Globals g;
  for (int i = 0; i < argc; ++i) g.argv += (i ? " " : "") + std::string(argv[i]);
  app.add_option("--config", g.config_path, "JSON config overlaying the built-in defaults")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Run seed (scenario, training and evaluation start seed)");
  app.add_option("--out", g.out,
                 std::string("Run directory (default: $") + kOutEnv + " or ./runs, plus <command>-seed<N>)");
  app.add_flag("--quiet,-q", g.quiet, "Only print errors");

  PolicyChoice sim;
  auto* simulate = app.add_subcommand("simulate", "Roll out one episode and write per-step CSVs");
  simulate->add_option("--policy", sim.policy, "rule_based, full_random, masked_random or greedy");
  simulate->add_option("--mask", sim.mask, "auto, full, knn, prompted or cached");
  simulate->add_option("--checkpoint", sim.checkpoint, "Q-network checkpoint for the greedy policy");
  simulate->add_option("--demos", sim.demos, "Demonstration log for kNN masks (default: generated)");
  simulate->fallthrough();

  std::optional<int> demo_days;
  auto* demos = app.add_subcommand("demos", "Generate a demonstration log in the building export schema");
  demos->add_option("--days", demo_days, "Number of simulated days");
  demos->fallthrough();

  std::string sft_demos;
  auto* sft = app.add_subcommand("export-sft", "Write the kNN-labelled fine-tuning records");
  sft->add_option("--demos", sft_demos, "Demonstration log (default: generated)");
  sft->fallthrough();

  TrainChoice tr;
  auto* trainc = app.add_subcommand("train", "Train masked or vanilla DQN");
  trainc->add_option("--variant", tr.variant, "masked or vanilla");
  trainc->add_option("--mask", tr.mask, "Mask source for the masked variant: knn, prompted or cached");
  trainc->add_option("--seeds", tr.seeds, "Training seeds")->delimiter(',');
  trainc->add_option("--episodes", tr.episodes, "Episodes per seed");
  trainc->add_option("--demos", tr.demos, "Demonstration log (default: generated)");
  trainc->fallthrough();

  PolicyChoice ev;
  std::optional<int> ev_episodes;
  std::string ev_label;
  auto* evalc = app.add_subcommand("evaluate", "Evaluate a policy over several seeded days");
  evalc->add_option("--policy", ev.policy, "rule_based, full_random, masked_random or greedy");
  evalc->add_option("--mask", ev.mask, "auto, full, knn, prompted or cached");
  evalc->add_option("--checkpoint", ev.checkpoint, "Q-network checkpoint for the greedy policy");
  evalc->add_option("--demos", ev.demos, "Demonstration log for kNN masks (default: generated)");
  evalc->add_option("--episodes", ev_episodes, "Number of evaluation days");
  evalc->add_option("--label", ev_label, "Row label in reports");
  evalc->fallthrough();

  std::vector<std::string> compare_dirs;
  auto* comparec = app.add_subcommand("compare", "Tabulate evaluation runs against the first one");
  comparec->add_option("runs", compare_dirs, "Evaluation run directories")->required();
  comparec->fallthrough();

  BenchChoice bc;
  auto* bench = app.add_subcommand("cache-bench", "Per-step mask latency with and without the cache");
  bench->add_option("--warm-days", bc.warm_days, "Days replayed to warm the cache (the first is the bench day)")
      ->check(CLI::PositiveNumber);
  bench->add_flag("--cold", bc.cold, "Start from an empty cache");
  bench->add_option("--provider", bc.provider, "Mask provider behind the cache: knn or prompted");
  bench->add_option("--demos", bc.demos, "Demonstration log (default: generated)");
  bench->add_option("--policy", bc.policy, "Controller: masked_random, rule_based or full_random");
  bench->fallthrough();

  auto* printc = app.add_subcommand("print-config", "Print the resolved configuration");
  printc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate) return cmd_simulate(g, sim);
    if (*demos) return cmd_demos(g, demo_days);
    if (*sft) return cmd_export_sft(g, sft_demos);
    if (*trainc) return cmd_train(g, tr);
    if (*evalc) return cmd_evaluate(g, ev, ev_episodes, ev_label);
    if (*comparec) return cmd_compare(g, compare_dirs);
    if (*bench) return cmd_cache_bench(g, bc);
    if (*printc) {
      std::cout << to_json(resolve_config(g)).dump(2) << "\n";
      return 0;
    }
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual_kPa() << " kPa after " << e.iterations()
              << " iterations)\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
