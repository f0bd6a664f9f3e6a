#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hvacrl {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fully connected network with ReLU hidden layers and a linear output head.
class QNetwork {
 public:
  QNetwork() = default;
  /// He-normal weights, zero biases.
  QNetwork(std::vector<int> layer_sizes, std::uint64_t seed);

  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t layer_count() const noexcept { return weights_.size(); }
  std::size_t parameter_count() const;

  RowMatrix& weights(std::size_t layer) { return weights_.at(layer); }
  const RowMatrix& weights(std::size_t layer) const { return weights_.at(layer); }
  Eigen::VectorXd& bias(std::size_t layer) { return biases_.at(layer); }
  const Eigen::VectorXd& bias(std::size_t layer) const { return biases_.at(layer); }

  Eigen::VectorXd forward(std::span<const double> x) const;
  /// Columns of `x` are samples; returns output_dim x batch.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;
  /// Activations of the last hidden layer, one column per sample.
  Eigen::MatrixXd hidden_batch(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>* trace = nullptr) const;

  bool finite() const;
  friend bool operator==(const QNetwork& a, const QNetwork& b);

 private:
  std::vector<int> sizes_;
  std::vector<RowMatrix> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Gradients of 0.5 * mean over the batch of (y_i - Q(x_i, a_i))^2 scaled by 2,
/// i.e. of the mean squared TD error. Only output rows of taken actions are
/// non-zero; `touched_rows` lists them once each in ascending order.
struct QGradients {
  std::vector<RowMatrix> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<int> touched_rows;
  double loss = 0.0;
};

/// Loss = mean_i (targets_i - Q(x_i, a_i))^2 and its gradient.
QGradients loss_gradients(const QNetwork& net, const Eigen::MatrixXd& x, std::span<const int> actions,
                          std::span<const double> targets);

double td_loss(const QNetwork& net, const Eigen::MatrixXd& x, std::span<const int> actions,
               std::span<const double> targets);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam. Hidden layers update densely; the output layer updates only the rows
/// present in the gradient, each with its own step count for bias correction.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(const QNetwork& net, AdamConfig config);

  void step(QNetwork& net, const QGradients& grads);
  std::int64_t steps() const noexcept { return t_; }

 private:
  AdamConfig config_;
  std::int64_t t_ = 0;
  std::vector<RowMatrix> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
  std::vector<std::int64_t> row_steps_;
};

/// Text header "HVACRL-QNET v1", a line with the layer sizes, then raw
/// little-endian doubles: each layer's row-major weights followed by its bias.
void save_checkpoint(std::ostream& out, const QNetwork& net);
QNetwork load_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const QNetwork& net);
QNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace hvacrl
