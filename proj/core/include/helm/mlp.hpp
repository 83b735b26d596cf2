#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace helm {

struct DenseLayer {
  Eigen::MatrixXd weight;  ///< out x in
  Eigen::VectorXd bias;    ///< out
};

/// Dense tanh network in -> h1 -> ... -> out with a linear output layer.
/// The actor additionally carries a state-independent log standard deviation.
struct MlpParams {
  std::vector<DenseLayer> layers;
  Eigen::VectorXd log_std;  ///< empty for networks without a Gaussian head

  int input_size() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols()); }
  int output_size() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows()); }
  std::vector<int> architecture() const;
  std::size_t parameter_count() const;
  bool empty() const { return layers.empty(); }

  /// Shapes chain and every entry is finite; throws InvalidParameter otherwise.
  void validate() const;

  /// Same shapes, all zeros.
  MlpParams zeros_like() const;

  bool operator==(const MlpParams& other) const;
};

/// Applies f(tensor_a, tensor_b, ...) over matching tensors of several
/// parameter sets in a fixed order: W0, b0, W1, b1, ..., log_std.
template <typename F, typename First, typename... Rest>
void for_each_tensor(F&& f, First& first, Rest&... rest) {
  for (std::size_t i = 0; i < first.layers.size(); ++i) {
    f(first.layers[i].weight, rest.layers[i].weight...);
    f(first.layers[i].bias, rest.layers[i].bias...);
  }
  if (first.log_std.size() > 0) f(first.log_std, rest.log_std...);
}

struct InitOptions {
  double hidden_gain = 1.0;
  double output_gain = 1.0;
  int log_std_size = 0;
  double log_std_init = 0.0;
};

/// Orthogonal initialisation (QR of a Gaussian matrix) scaled by the layer
/// gain; biases start at zero.
MlpParams make_mlp(std::span<const int> sizes, std::mt19937_64& rng, const InitOptions& options);

/// Activations retained for the backward pass; activations[0] is the input,
/// activations[i] the tanh output of hidden layer i, back() the linear output.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
};

/// Batched forward pass: each column of input is one sample.
Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& input,
                        ForwardCache* cache = nullptr);

Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& input);

/// Reverse-mode gradients of a scalar loss given dL/d(output) for every
/// column of the cached batch. log_std gradients are returned as zero; heads
/// that depend on log_std add their own contribution.
MlpParams gradients(const MlpParams& params, const ForwardCache& cache,
                    const Eigen::MatrixXd& upstream);

struct AdamState {
  MlpParams first_moment;
  MlpParams second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const MlpParams& params);
};

/// Bias-corrected Adam update, in place.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& adam, double lr);

/// Max over all parameters of |analytic - central difference| scaled by
/// max(|analytic|, |numeric|, floor).
double finite_diff_check(const MlpParams& params,
                         const std::function<double(const MlpParams&)>& loss,
                         const MlpParams& analytic, double h, double floor = 1e-6);

}  // namespace helm
