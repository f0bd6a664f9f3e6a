#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "hvacrl/features.hpp"
#include "hvacrl/mask_source.hpp"
#include "hvacrl/qnetwork.hpp"

namespace hvacrl {

/// Next-state feasibility is stored as per-zone sets; the joint mask they
/// describe is expanded only when a target is computed.
struct Transition {
  RawFeatures features{};
  int action = 0;
  double reward = 0.0;
  RawFeatures next_features{};
  bool done = false;
  FeasibleSets next_sets = FeasibleSets::full();
};

/// Fixed-capacity FIFO with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const Transition& at(std::size_t i) const { return data_.at(i); }
  /// Indices into the buffer, uniform over the stored transitions.
  std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> data_;
};

struct TrainConfig {
  double gamma = 0.99;
  AdamConfig adam;
  std::size_t replay_capacity = 50000;
  std::size_t batch_size = 64;
  std::size_t warmup = 500;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;
  int target_sync_every = 500;  // gradient steps
  int train_every = 4;          // environment steps per gradient step
  double mask_penalty = 1e9;    // C
  double reward_scale = 0.01;   // applied to stored rewards only
  int episodes = 300;
  std::vector<int> hidden{256, 256};
  std::uint64_t seed = 0;
  bool record_losses = false;

  void validate() const;
};

/// Linear decay from epsilon_start to epsilon_end over the first
/// epsilon_decay_fraction of `total_steps`, constant afterwards.
double epsilon_at(const TrainConfig& config, std::int64_t step, std::int64_t total_steps);

/// q - C * (1 - m).
Eigen::VectorXd masked_q(const Eigen::VectorXd& q, const ActionMask& mask, double penalty);

/// Lowest index of the maximum.
int argmax_index(const Eigen::VectorXd& q);

/// Epsilon-greedy over the set bits: with probability epsilon a uniform set
/// bit, otherwise the masked argmax. Throws ConfigError on an empty mask.
int select_action(const QNetwork& net, std::span<const double> features, const ActionMask& mask, double epsilon,
                  std::mt19937_64& rng, double penalty = 1e9);

/// The k-th set bit in index order.
int nth_allowed(const ActionMask& mask, int k);

/// y = r + (1 - d) * gamma * max over next_sets of target Q(s').
std::vector<double> bellman_target(std::span<const Transition> batch, const QNetwork& target_net, double gamma,
                                   double penalty = 1e9);

/// One Adam step on the mean squared TD error; returns the loss before the
/// step. Throws NumericalError when the loss is not finite.
double td_update(QNetwork& online, AdamOptimizer& optimizer, const QNetwork& target_net,
                 std::span<const Transition> batch, double gamma, double penalty = 1e9);

struct EpisodeRecord {
  int episode = 0;
  std::uint64_t env_seed = 0;
  double reward = 0.0;
  double ppd_mean = 0.0;
  double pmv_abs_mean = 0.0;
  double energy_kWh = 0.0;
  double epsilon = 0.0;
  double remaining_pct = 0.0;  // mean over the episode's steps
  double mean_loss = 0.0;
};

struct TrainResult {
  QNetwork network;
  std::vector<EpisodeRecord> curve;
  std::int64_t env_steps = 0;
  std::int64_t gradient_steps = 0;
  std::int64_t target_syncs = 0;
};

/// Episode seed for training episode `episode` of training seed `seed`.
std::uint64_t training_episode_seed(std::uint64_t seed, int episode);

/// Called after each episode; the network is the current online network.
using EpisodeCallback = std::function<void(const EpisodeRecord&, const QNetwork&)>;

/// Masked DQN. Every emitted action is checked against the current mask.
TrainResult train(const Scenario& scenario, MaskSource& masks, const TrainConfig& config,
                  const EpisodeCallback& on_episode = {});

/// The same loop with every masking step compiled out.
TrainResult train_unmasked(const Scenario& scenario, const TrainConfig& config,
                           const EpisodeCallback& on_episode = {});

/// Mean over the last max(1, round(5% of episodes)) episodes.
double final_window_mean(std::span<const EpisodeRecord> curve, double fraction = 0.05);
/// Trapezoid area under the episode-reward curve (unit spacing).
double curve_auc(std::span<const EpisodeRecord> curve);

}  // namespace hvacrl
