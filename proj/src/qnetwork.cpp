#include "hvacrl/qnetwork.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "hvacrl/errors.hpp"

namespace hvacrl {

namespace {

constexpr const char* kMagic = "HVACRL-QNET v1";

void check_input(const QNetwork& net, Eigen::Index rows) {
  if (net.layer_count() == 0) throw ConfigError("network has no layers");
  if (rows != net.input_dim()) {
    throw ConfigError("input has " + std::to_string(rows) + " features, network expects " +
                      std::to_string(net.input_dim()));
  }
}

}  // namespace

QNetwork::QNetwork(std::vector<int> layer_sizes, std::uint64_t seed) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ConfigError("network needs at least an input and an output layer");
  for (int s : sizes_) {
    if (s <= 0) throw ConfigError("layer sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / in));
    RowMatrix w(out, in);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = he(rng);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(out));
  }
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

Eigen::VectorXd QNetwork::forward(std::span<const double> x) const {
  check_input(*this, static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd QNetwork::hidden_batch(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>* trace) const {
  check_input(*this, x.rows());
  Eigen::MatrixXd a = x;
  if (trace) trace->assign(1, a);
  for (std::size_t l = 0; l + 1 < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    a = z.cwiseMax(0.0);
    if (trace) trace->push_back(a);
  }
  return a;
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd h = hidden_batch(x);
  Eigen::MatrixXd q = weights_.back() * h;
  q.colwise() += biases_.back();
  return q;
}

bool QNetwork::finite() const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  }
  return true;
}

bool operator==(const QNetwork& a, const QNetwork& b) {
  if (a.sizes_ != b.sizes_) return false;
  for (std::size_t l = 0; l < a.weights_.size(); ++l) {
    const auto wn = static_cast<std::size_t>(a.weights_[l].size());
    const auto bn = static_cast<std::size_t>(a.biases_[l].size());
    if (std::memcmp(a.weights_[l].data(), b.weights_[l].data(), wn * sizeof(double)) != 0) return false;
    if (std::memcmp(a.biases_[l].data(), b.biases_[l].data(), bn * sizeof(double)) != 0) return false;
  }
  return true;
}

QGradients loss_gradients(const QNetwork& net, const Eigen::MatrixXd& x, std::span<const int> actions,
                          std::span<const double> targets) {
  const auto batch = static_cast<std::size_t>(x.cols());
  if (batch == 0) throw ConfigError("empty batch");
  if (actions.size() != batch || targets.size() != batch) throw ConfigError("batch arrays disagree in length");
  for (int a : actions) {
    if (a < 0 || a >= net.output_dim()) throw ConfigError("action " + std::to_string(a) + " outside the output layer");
  }

  std::vector<Eigen::MatrixXd> act;
  const Eigen::MatrixXd h = net.hidden_batch(x, &act);
  const RowMatrix& w_out = net.weights(net.layer_count() - 1);
  const Eigen::VectorXd& b_out = net.bias(net.layer_count() - 1);

  QGradients g;
  Eigen::VectorXd dq(static_cast<Eigen::Index>(batch));
  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const double q = w_out.row(actions[i]).dot(h.col(col)) + b_out(actions[i]);
    const double err = targets[i] - q;
    loss += err * err;
    dq(col) = -2.0 * err / static_cast<double>(batch);
  }
  g.loss = loss / static_cast<double>(batch);

  // compact output gradient: one row per distinct action
  std::map<int, Eigen::Index> slot;
  for (int a : actions) slot.emplace(a, 0);
  Eigen::Index next = 0;
  for (auto& [a, s] : slot) {
    s = next++;
    g.touched_rows.push_back(a);
  }
  const std::size_t layers = net.layer_count();
  g.weights.resize(layers);
  g.biases.resize(layers);
  g.weights[layers - 1] = RowMatrix::Zero(next, w_out.cols());
  g.biases[layers - 1] = Eigen::VectorXd::Zero(next);
  Eigen::MatrixXd delta(h.rows(), h.cols());
  for (std::size_t i = 0; i < batch; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const Eigen::Index s = slot.at(actions[i]);
    g.weights[layers - 1].row(s) += dq(col) * h.col(col).transpose();
    g.biases[layers - 1](s) += dq(col);
    delta.col(col) = dq(col) * w_out.row(actions[i]).transpose();
  }

  for (std::size_t l = layers - 1; l-- > 0;) {
    // act[l + 1] is this layer's ReLU output, act[l] its input
    delta = delta.cwiseProduct((act[l + 1].array() > 0.0).cast<double>().matrix());
    g.weights[l] = delta * act[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) delta = net.weights(l).transpose() * delta;
  }
  return g;
}

double td_loss(const QNetwork& net, const Eigen::MatrixXd& x, std::span<const int> actions,
               std::span<const double> targets) {
  const Eigen::MatrixXd h = net.hidden_batch(x);
  const RowMatrix& w_out = net.weights(net.layer_count() - 1);
  const Eigen::VectorXd& b_out = net.bias(net.layer_count() - 1);
  double loss = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double err =
        targets[i] - (w_out.row(actions[i]).dot(h.col(static_cast<Eigen::Index>(i))) + b_out(actions[i]));
    loss += err * err;
  }
  return loss / static_cast<double>(actions.size());
}

AdamOptimizer::AdamOptimizer(const QNetwork& net, AdamConfig config) : config_(config) {
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    m_w_.push_back(RowMatrix::Zero(net.weights(l).rows(), net.weights(l).cols()));
    v_w_.push_back(RowMatrix::Zero(net.weights(l).rows(), net.weights(l).cols()));
    m_b_.push_back(Eigen::VectorXd::Zero(net.bias(l).size()));
    v_b_.push_back(Eigen::VectorXd::Zero(net.bias(l).size()));
  }
  row_steps_.assign(static_cast<std::size_t>(net.output_dim()), 0);
}

void AdamOptimizer::step(QNetwork& net, const QGradients& grads) {
  const std::size_t layers = net.layer_count();
  if (grads.weights.size() != layers || m_w_.size() != layers) throw ConfigError("optimizer/network mismatch");
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;

  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    m_w_[l] = b1 * m_w_[l] + (1.0 - b1) * grads.weights[l];
    v_w_[l] = b2 * v_w_[l] + (1.0 - b2) * grads.weights[l].cwiseAbs2();
    net.weights(l).array() -= lr * (m_w_[l].array() / c1) / ((v_w_[l].array() / c2).sqrt() + eps);
    m_b_[l] = b1 * m_b_[l] + (1.0 - b1) * grads.biases[l];
    v_b_[l] = b2 * v_b_[l] + (1.0 - b2) * grads.biases[l].cwiseAbs2();
    net.bias(l).array() -= lr * (m_b_[l].array() / c1) / ((v_b_[l].array() / c2).sqrt() + eps);
  }

  const std::size_t out = layers - 1;
  RowMatrix& w = net.weights(out);
  Eigen::VectorXd& b = net.bias(out);
  for (std::size_t s = 0; s < grads.touched_rows.size(); ++s) {
    const int r = grads.touched_rows[s];
    const auto si = static_cast<Eigen::Index>(s);
    const auto n = static_cast<double>(++row_steps_[static_cast<std::size_t>(r)]);
    const double rc1 = 1.0 - std::pow(b1, n);
    const double rc2 = 1.0 - std::pow(b2, n);
    auto mw = m_w_[out].row(r);
    auto vw = v_w_[out].row(r);
    const auto gw = grads.weights[out].row(si);
    mw = b1 * mw + (1.0 - b1) * gw;
    vw = b2 * vw + (1.0 - b2) * gw.cwiseAbs2();
    w.row(r).array() -= lr * (mw.array() / rc1) / ((vw.array() / rc2).sqrt() + eps);
    const double gb = grads.biases[out](si);
    m_b_[out](r) = b1 * m_b_[out](r) + (1.0 - b1) * gb;
    v_b_[out](r) = b2 * v_b_[out](r) + (1.0 - b2) * gb * gb;
    b(r) -= lr * (m_b_[out](r) / rc1) / (std::sqrt(v_b_[out](r) / rc2) + eps);
  }
}

void save_checkpoint(std::ostream& out, const QNetwork& net) {
  static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian doubles");
  out << kMagic << "\n" << "layers";
  for (int s : net.layer_sizes()) out << ' ' << s;
  out << "\n";
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    out.write(reinterpret_cast<const char*>(net.weights(l).data()),
              static_cast<std::streamsize>(net.weights(l).size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(net.bias(l).data()),
              static_cast<std::streamsize>(net.bias(l).size() * sizeof(double)));
  }
  if (!out) throw ConfigError("checkpoint write failed");
}

QNetwork load_checkpoint(std::istream& in) {
  std::string magic;
  std::getline(in, magic);
  if (magic != kMagic) throw ConfigError("not a Q-network checkpoint (header '" + magic + "')");
  std::string line;
  std::getline(in, line);
  std::istringstream is(line);
  std::string word;
  is >> word;
  if (word != "layers") throw ConfigError("checkpoint: missing layer sizes");
  std::vector<int> sizes;
  for (int s; is >> s;) sizes.push_back(s);
  QNetwork net(sizes, 0);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    in.read(reinterpret_cast<char*>(net.weights(l).data()),
            static_cast<std::streamsize>(net.weights(l).size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(net.bias(l).data()),
            static_cast<std::streamsize>(net.bias(l).size() * sizeof(double)));
  }
  if (!in) throw ConfigError("checkpoint truncated");
  if (in.peek() != std::char_traits<char>::eof()) throw ConfigError("checkpoint has trailing bytes");
  if (!net.finite()) throw NumericalError("checkpoint contains non-finite parameters");
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const QNetwork& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint '" + path.string() + "'");
  save_checkpoint(out, net);
}

QNetwork load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path.string() + "'");
  return load_checkpoint(in);
}

}  // namespace hvacrl
