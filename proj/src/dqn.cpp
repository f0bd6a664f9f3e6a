#include "hvacrl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hvacrl/errors.hpp"

namespace hvacrl {

namespace {

// Calls fn(flat_index) for every joint action admitted by `sets`, in
// increasing index order.
template <typename Fn>
void for_each_admitted(const FeasibleSets& sets, Fn&& fn) {
  std::array<std::array<int, kFanLevels>, kZones> options{};
  std::array<int, kZones> count{};
  for (std::size_t j = 0; j < static_cast<std::size_t>(kZones); ++j) {
    for (int l = 0; l < kFanLevels; ++l) {
      if (sets.contains(static_cast<int>(j), l)) options[j][static_cast<std::size_t>(count[j]++)] = l;
    }
    if (count[j] == 0) return;
  }
  // the most significant digit (zone 7) varies slowest
  std::array<int, kZones> cursor{};
  for (;;) {
    int index = 0;
    for (std::size_t j = kZones; j-- > 0;) {
      index = index * kFanLevels + options[j][static_cast<std::size_t>(cursor[j])];
    }
    fn(index);
    std::size_t j = 0;
    while (j < static_cast<std::size_t>(kZones) && ++cursor[j] == count[j]) cursor[j++] = 0;
    if (j == static_cast<std::size_t>(kZones)) return;
  }
}

// Row-by-row evaluation wins only while few output rows are needed.
bool dense_is_cheaper(std::int64_t rows) { return rows * 4 > kActionCount; }

Eigen::MatrixXd stack_features(std::span<const Transition> batch, bool next) {
  Eigen::MatrixXd x(kFeatureDim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const RawFeatures& f = next ? batch[i].next_features : batch[i].features;
    for (int q = 0; q < kFeatureDim; ++q) x(q, static_cast<Eigen::Index>(i)) = f[static_cast<std::size_t>(q)];
  }
  return x;
}

// Greedy or uniform choice over all actions; the draws mirror select_action
// with an all-ones mask.
int select_unmasked(const QNetwork& net, std::span<const double> features, double epsilon, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < epsilon) return std::uniform_int_distribution<int>(0, kActionCount - 1)(rng);
  return argmax_index(net.forward(features));
}

std::vector<double> unmasked_targets(std::span<const Transition> batch, const QNetwork& target_net, double gamma) {
  const Eigen::MatrixXd q_next = target_net.forward_batch(stack_features(batch, true));
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y[i] = batch[i].reward;
    if (!batch[i].done) y[i] += gamma * q_next.col(static_cast<Eigen::Index>(i)).maxCoeff();
  }
  return y;
}

struct EpisodeAccumulator {
  double reward = 0.0;
  double ppd = 0.0;
  double pmv = 0.0;
  double energy = 0.0;
  double remaining = 0.0;
  double loss = 0.0;
  int occupied = 0;
  int steps = 0;
  int losses = 0;
};

template <bool kMasked>
TrainResult train_impl(const Scenario& scenario, MaskSource* masks, const TrainConfig& config,
                       const EpisodeCallback& on_episode) {
  config.validate();
  Environment env(scenario);
  const FeatureScaler scaler = FeatureScaler::for_scenario(scenario);
  std::vector<int> sizes{kFeatureDim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(kActionCount);

  TrainResult result;
  auto init_rng = make_rng(config.seed, 11);
  QNetwork online(sizes, init_rng());
  QNetwork target = online;
  AdamOptimizer optimizer(online, config.adam);
  ReplayBuffer buffer(config.replay_capacity);
  auto rng = make_rng(config.seed, 10);

  const std::int64_t total_steps = static_cast<std::int64_t>(config.episodes) * scenario.episode_steps;
  std::vector<Transition> batch(config.batch_size);

  for (int ep = 0; ep < config.episodes; ++ep) {
    const std::uint64_t env_seed = training_episode_seed(config.seed, ep);
    env.reset(env_seed);
    RawFeatures features = scaler.apply(env.state());
    FeasibleSets sets = FeasibleSets::full();
    if constexpr (kMasked) sets = masks->feasible_sets(env.prompt_window());
    EpisodeAccumulator acc;
    double epsilon = config.epsilon_start;

    while (!env.done()) {
      epsilon = epsilon_at(config, result.env_steps, total_steps);
      int action = 0;
      if constexpr (kMasked) {
        const ActionMask mask = joint_mask(sets);
        action = select_action(online, features, mask, epsilon, rng, config.mask_penalty);
        if (!mask.allows(action)) throw Error("emitted action " + std::to_string(action) + " outside the mask");
        acc.remaining += remaining_percentage(mask);
      } else {
        action = select_unmasked(online, features, epsilon, rng);
        acc.remaining += 100.0;
      }

      const StepResult step = env.step(JointAction::from_index(action));
      Transition t;
      t.features = features;
      t.action = action;
      t.reward = step.reward * config.reward_scale;
      t.next_features = scaler.apply(step.next);
      t.done = step.done;
      if constexpr (kMasked) {
        if (!step.done) t.next_sets = masks->feasible_sets(env.prompt_window());
      }
      buffer.push(t);
      ++result.env_steps;

      const auto& m = step.info.metrics;
      acc.reward += step.reward;
      acc.energy += m.power_kW * scenario.control_interval_min / 60.0;
      if (m.occupants_total > 0) {
        acc.ppd += m.ppd_mean_pct;
        acc.pmv += m.pmv_abs_mean;
        ++acc.occupied;
      }
      ++acc.steps;

      if (buffer.size() >= config.warmup && result.env_steps % config.train_every == 0) {
        const auto idx = buffer.sample_indices(config.batch_size, rng);
        for (std::size_t i = 0; i < idx.size(); ++i) batch[i] = buffer.at(idx[i]);
        double loss = 0.0;
        if constexpr (kMasked) {
          loss = td_update(online, optimizer, target, batch, config.gamma, config.mask_penalty);
        } else {
          const auto y = unmasked_targets(batch, target, config.gamma);
          const Eigen::MatrixXd x = stack_features(batch, false);
          std::vector<int> actions(batch.size());
          for (std::size_t i = 0; i < batch.size(); ++i) actions[i] = batch[i].action;
          const QGradients g = loss_gradients(online, x, actions, y);
          if (!std::isfinite(g.loss)) throw NumericalError("non-finite TD loss at gradient step " +
                                                           std::to_string(result.gradient_steps));
          optimizer.step(online, g);
          loss = g.loss;
        }
        acc.loss += loss;
        ++acc.losses;
        ++result.gradient_steps;
        if (result.gradient_steps % config.target_sync_every == 0) {
          target = online;
          ++result.target_syncs;
        }
      }
      features = t.next_features;
      sets = t.next_sets;
    }

    EpisodeRecord rec;
    rec.episode = ep;
    rec.env_seed = env_seed;
    rec.reward = acc.reward;
    rec.ppd_mean = acc.occupied ? acc.ppd / acc.occupied : 0.0;
    rec.pmv_abs_mean = acc.occupied ? acc.pmv / acc.occupied : 0.0;
    rec.energy_kWh = acc.energy;
    rec.epsilon = epsilon;
    rec.remaining_pct = acc.steps ? acc.remaining / acc.steps : 0.0;
    rec.mean_loss = acc.losses ? acc.loss / acc.losses : 0.0;
    result.curve.push_back(rec);
    if (on_episode) on_episode(rec, online);
  }
  result.network = std::move(online);
  return result;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
  if (t.action < 0 || t.action >= kActionCount) throw ConfigError("transition action out of range");
  if (!t.done && !t.next_sets.valid()) throw ConfigError("non-terminal transition with an empty next mask");
  if (data_.size() < capacity_) {
    data_.push_back(t);
  } else {
    data_[head_] = t;
    head_ = (head_ + 1) % capacity_;
  }
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, std::mt19937_64& rng) const {
  if (data_.empty()) throw ConfigError("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size == 0 || replay_capacity == 0) throw ConfigError("batch size and replay capacity must be positive");
  if (warmup < batch_size) throw ConfigError("warmup must cover at least one batch");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ConfigError("epsilon bounds must lie in [0, 1]");
  }
  if (!(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0)) {
    throw ConfigError("epsilon decay fraction must lie in (0, 1]");
  }
  if (target_sync_every <= 0 || train_every <= 0) throw ConfigError("update periods must be positive");
  if (!(mask_penalty >= 1e6)) throw ConfigError("mask penalty must dominate any reachable Q value (>= 1e6)");
  if (!(reward_scale > 0.0)) throw ConfigError("reward scale must be positive");
  if (episodes < 0) throw ConfigError("episode count must be non-negative");
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("hidden layer widths must be positive");
  }
}

double epsilon_at(const TrainConfig& config, std::int64_t step, std::int64_t total_steps) {
  const double horizon = config.epsilon_decay_fraction * static_cast<double>(total_steps);
  if (horizon <= 0.0) return config.epsilon_end;
  const double frac = static_cast<double>(step) / horizon;
  if (frac >= 1.0) return config.epsilon_end;
  return config.epsilon_start + frac * (config.epsilon_end - config.epsilon_start);
}

Eigen::VectorXd masked_q(const Eigen::VectorXd& q, const ActionMask& mask, double penalty) {
  if (q.size() != kActionCount) throw ConfigError("masked_q expects " + std::to_string(kActionCount) + " values");
  Eigen::VectorXd out = q;
  for (Eigen::Index a = 0; a < q.size(); ++a) {
    out(a) = q(a) - penalty * (mask.allows(static_cast<int>(a)) ? 0.0 : 1.0);
  }
  return out;
}

int argmax_index(const Eigen::VectorXd& q) {
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a) {
    if (q(a) > q(best)) best = a;
  }
  return static_cast<int>(best);
}

int nth_allowed(const ActionMask& mask, int k) {
  std::size_t bit = mask.bits._Find_first();
  for (int i = 0; i < k && bit < mask.bits.size(); ++i) bit = mask.bits._Find_next(bit);
  if (bit >= mask.bits.size()) throw ConfigError("mask has fewer than " + std::to_string(k + 1) + " allowed actions");
  return static_cast<int>(bit);
}

int select_action(const QNetwork& net, std::span<const double> features, const ActionMask& mask, double epsilon,
                  std::mt19937_64& rng, double penalty) {
  const int count = static_cast<int>(mask.bits.count());
  if (count == 0) throw ConfigError("select_action: empty mask");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < epsilon) return nth_allowed(mask, std::uniform_int_distribution<int>(0, count - 1)(rng));
  if (dense_is_cheaper(count)) return argmax_index(masked_q(net.forward(features), mask, penalty));
  // small masks: evaluate only the admitted output rows
  const Eigen::VectorXd h = net.hidden_batch(Eigen::Map<const Eigen::VectorXd>(
      features.data(), static_cast<Eigen::Index>(features.size())));
  const std::size_t out = net.layer_count() - 1;
  const RowMatrix& w = net.weights(out);
  const Eigen::VectorXd& b = net.bias(out);
  int best = -1;
  double best_q = 0.0;
  for (std::size_t a = mask.bits._Find_first(); a < mask.bits.size(); a = mask.bits._Find_next(a)) {
    const auto r = static_cast<Eigen::Index>(a);
    const double q = w.row(r).dot(h.col(0)) + b(r);
    if (best < 0 || q > best_q) {
      best = static_cast<int>(a);
      best_q = q;
    }
  }
  return best;
}

std::vector<double> bellman_target(std::span<const Transition> batch, const QNetwork& target_net, double gamma,
                                   double penalty) {
  (void)penalty;  // the max is taken over admitted actions only, which is what q - C(1 - m) selects
  std::int64_t admitted = 0;
  for (const auto& t : batch) {
    if (t.done) continue;
    std::int64_t n = 1;
    for (int j = 0; j < kZones; ++j) n *= t.next_sets.size(j);
    if (n == 0) throw ConfigError("non-terminal transition with an empty next mask");
    admitted += n;
  }
  const Eigen::MatrixXd x = stack_features(batch, true);
  std::vector<double> y(batch.size());
  const bool dense = dense_is_cheaper(admitted / std::max<std::int64_t>(1, static_cast<std::int64_t>(batch.size())));
  Eigen::MatrixXd q_next;
  Eigen::MatrixXd h;
  if (dense) {
    q_next = target_net.forward_batch(x);
  } else {
    h = target_net.hidden_batch(x);
  }
  const std::size_t out = target_net.layer_count() - 1;
  const RowMatrix& w = target_net.weights(out);
  const Eigen::VectorXd& b = target_net.bias(out);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y[i] = batch[i].reward;
    if (batch[i].done) continue;
    const auto c = static_cast<Eigen::Index>(i);
    double best = -std::numeric_limits<double>::infinity();
    if (dense) {
      const auto col = q_next.col(c);
      for_each_admitted(batch[i].next_sets, [&](int a) { best = std::max(best, col(a)); });
    } else {
      const auto hc = h.col(c);
      for_each_admitted(batch[i].next_sets, [&](int a) { best = std::max(best, w.row(a).dot(hc) + b(a)); });
    }
    y[i] += gamma * best;
  }
  return y;
}

double td_update(QNetwork& online, AdamOptimizer& optimizer, const QNetwork& target_net,
                 std::span<const Transition> batch, double gamma, double penalty) {
  if (batch.empty()) throw ConfigError("td_update: empty batch");
  const auto y = bellman_target(batch, target_net, gamma, penalty);
  const Eigen::MatrixXd x = stack_features(batch, false);
  std::vector<int> actions(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) actions[i] = batch[i].action;
  const QGradients g = loss_gradients(online, x, actions, y);
  if (!std::isfinite(g.loss)) {
    throw NumericalError("non-finite TD loss (batch " + std::to_string(batch.size()) + ", first target " +
                         std::to_string(y.front()) + ")");
  }
  optimizer.step(online, g);
  return g.loss;
}

std::uint64_t training_episode_seed(std::uint64_t seed, int episode) {
  return 100'000ULL * (seed + 1) + static_cast<std::uint64_t>(episode);
}

TrainResult train(const Scenario& scenario, MaskSource& masks, const TrainConfig& config,
                  const EpisodeCallback& on_episode) {
  return train_impl<true>(scenario, &masks, config, on_episode);
}

TrainResult train_unmasked(const Scenario& scenario, const TrainConfig& config, const EpisodeCallback& on_episode) {
  return train_impl<false>(scenario, nullptr, config, on_episode);
}

double final_window_mean(std::span<const EpisodeRecord> curve, double fraction) {
  if (curve.empty()) return 0.0;
  const auto n = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(fraction * static_cast<double>(curve.size()))), 1, curve.size());
  double sum = 0.0;
  for (std::size_t i = curve.size() - n; i < curve.size(); ++i) sum += curve[i].reward;
  return sum / static_cast<double>(n);
}

double curve_auc(std::span<const EpisodeRecord> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) area += 0.5 * (curve[i - 1].reward + curve[i].reward);
  return area;
}

}  // namespace hvacrl
