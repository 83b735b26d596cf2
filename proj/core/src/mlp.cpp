#include "helm/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "helm/errors.hpp"

namespace helm {

std::vector<int> MlpParams::architecture() const {
  std::vector<int> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(input_size());
  for (const auto& l : layers) sizes.push_back(static_cast<int>(l.weight.rows()));
  return sizes;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n + static_cast<std::size_t>(log_std.size());
}

void MlpParams::validate() const {
  if (layers.empty()) throw InvalidParameter("network has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.weight.rows() == 0 || l.weight.cols() == 0 || l.bias.size() != l.weight.rows()) {
      throw InvalidParameter("layer " + std::to_string(i) + " has inconsistent shapes");
    }
    if (i > 0 && l.weight.cols() != layers[i - 1].weight.rows()) {
      throw InvalidParameter("layer " + std::to_string(i) + " does not chain with its predecessor");
    }
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      throw InvalidParameter("layer " + std::to_string(i) + " has non-finite entries");
    }
  }
  if (!log_std.allFinite()) throw InvalidParameter("log_std has non-finite entries");
}

MlpParams MlpParams::zeros_like() const {
  MlpParams z = *this;
  for_each_tensor([](auto& t) { t.setZero(); }, z);
  return z;
}

bool MlpParams::operator==(const MlpParams& other) const {
  if (layers.size() != other.layers.size() || log_std.size() != other.log_std.size()) return false;
  bool equal = true;
  for_each_tensor(
      [&](const auto& x, const auto& y) {
        equal = equal && x.rows() == y.rows() && x.cols() == y.cols() && x == y;
      },
      *this, other);
  return equal;
}

namespace {

Eigen::MatrixXd orthogonal(int rows, int cols, double gain, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Eigen::MatrixXd g(big, small);
  for (int c = 0; c < small; ++c) {
    for (int r = 0; r < big; ++r) g(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  // Sign fix so the distribution is uniform over orthogonal matrices.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int c = 0; c < small; ++c) {
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  }
  Eigen::MatrixXd w = rows >= cols ? q : Eigen::MatrixXd(q.transpose());
  return gain * w;
}

}  // namespace

MlpParams make_mlp(std::span<const int> sizes, std::mt19937_64& rng, const InitOptions& options) {
  if (sizes.size() < 2) throw InvalidParameter("network needs at least an input and an output size");
  for (int s : sizes) {
    if (s <= 0) throw InvalidParameter("layer sizes must be positive");
  }
  MlpParams p;
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    const bool is_output = i + 1 == sizes.size();
    DenseLayer layer;
    layer.weight = orthogonal(sizes[i], sizes[i - 1], is_output ? options.output_gain : options.hidden_gain, rng);
    layer.bias = Eigen::VectorXd::Zero(sizes[i]);
    p.layers.push_back(std::move(layer));
  }
  if (options.log_std_size > 0) {
    p.log_std = Eigen::VectorXd::Constant(options.log_std_size, options.log_std_init);
  }
  return p;
}

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& input, ForwardCache* cache) {
  if (params.layers.empty()) throw InvalidParameter("forward on an empty network");
  if (input.rows() != params.input_size()) {
    throw InvalidParameter("input has " + std::to_string(input.rows()) + " rows, network expects " +
                           std::to_string(params.input_size()));
  }
  if (cache != nullptr) {
    cache->activations.clear();
    cache->activations.reserve(params.layers.size() + 1);
    cache->activations.push_back(input);
  }
  Eigen::MatrixXd a = input;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& l = params.layers[i];
    Eigen::MatrixXd z = l.weight * a;
    z.colwise() += l.bias;
    if (i + 1 < params.layers.size()) z = z.array().tanh().matrix();
    a = std::move(z);
    if (cache != nullptr) cache->activations.push_back(a);
  }
  return a;
}

Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& input) {
  const Eigen::MatrixXd in = input;
  return forward(params, in, nullptr).col(0);
}

MlpParams gradients(const MlpParams& params, const ForwardCache& cache,
                    const Eigen::MatrixXd& upstream) {
  const std::size_t n_layers = params.layers.size();
  if (cache.activations.size() != n_layers + 1) {
    throw InvalidParameter("forward cache does not match the network");
  }
  if (upstream.rows() != params.output_size() || upstream.cols() != cache.activations.back().cols()) {
    throw InvalidParameter("upstream gradient shape does not match the cached output");
  }
  MlpParams grads = params.zeros_like();
  Eigen::MatrixXd delta = upstream;  // dL/dz of the current layer
  for (std::size_t k = n_layers; k-- > 0;) {
    const Eigen::MatrixXd& input = cache.activations[k];
    grads.layers[k].weight.noalias() = delta * input.transpose();
    grads.layers[k].bias = delta.rowwise().sum();
    if (k > 0) {
      Eigen::MatrixXd back = params.layers[k].weight.transpose() * delta;
      // input is tanh(z_{k-1}); tanh' = 1 - tanh^2
      delta = (back.array() * (1.0 - input.array().square())).matrix();
    }
  }
  return grads;
}

AdamState AdamState::for_params(const MlpParams& params) {
  AdamState s;
  s.first_moment = params.zeros_like();
  s.second_moment = params.zeros_like();
  return s;
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& adam, double lr) {
  ++adam.step;
  const double t = static_cast<double>(adam.step);
  const double c1 = 1.0 - std::pow(adam.beta1, t);
  const double c2 = 1.0 - std::pow(adam.beta2, t);
  const double b1 = adam.beta1;
  const double b2 = adam.beta2;
  const double eps = adam.epsilon;
  for_each_tensor(
      [&](auto& p, auto& grad, auto& m, auto& v) {
        if (p.rows() != grad.rows() || p.cols() != grad.cols() || p.rows() != m.rows() ||
            p.cols() != m.cols()) {
          throw InvalidParameter("Adam: gradient or moment shape mismatch");
        }
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
        p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
      },
      params, grads, adam.first_moment, adam.second_moment);
}

double finite_diff_check(const MlpParams& params,
                         const std::function<double(const MlpParams&)>& loss,
                         const MlpParams& analytic, double h, double floor) {
  MlpParams probe = params;
  double worst = 0.0;
  for_each_tensor(
      [&](auto& p, auto& ga) {
        for (Eigen::Index i = 0; i < p.size(); ++i) {
          double& x = p.data()[i];
          const double saved = x;
          x = saved + h;
          const double up = loss(probe);
          x = saved - h;
          const double down = loss(probe);
          x = saved;
          const double numeric = (up - down) / (2.0 * h);
          const double exact = ga.data()[i];
          const double scale = std::max({std::abs(exact), std::abs(numeric), floor});
          worst = std::max(worst, std::abs(exact - numeric) / scale);
        }
      },
      probe, analytic);
  return worst;
}

}  // namespace helm
