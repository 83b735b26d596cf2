#include "helm/policy.hpp"

#include <algorithm>
#include <cmath>

#include "helm/errors.hpp"

namespace helm {

Eigen::VectorXd observation_vector(const Observation& obs) {
  Eigen::VectorXd v(Observation::kSize);
  v << obs.d_c, obs.chi_e, obs.d_wp, obs.r;
  return v;
}

double policy_mean(const MlpParams& actor, const Observation& obs) {
  if (actor.empty()) throw NotReady("policy has no weights");
  return std::tanh(forward(actor, observation_vector(obs))(0));
}

double gaussian_log_prob(double action, double mean, double log_std) {
  const double z = (action - mean) * std::exp(-log_std);
  return -0.5 * z * z - log_std - kLogSqrtTwoPi;
}

double gaussian_entropy(double log_std) { return 0.5 + kLogSqrtTwoPi + log_std; }

double action_to_rudder(double action, double delta_max_rad) {
  return std::clamp(action, -1.0, 1.0) * delta_max_rad;
}

ActionSample sample_action(const MlpParams& actor, const Observation& obs, std::mt19937_64& rng,
                           double delta_max_rad) {
  if (actor.log_std.size() != 1) throw NotReady("actor has no Gaussian head");
  ActionSample s;
  s.mean = policy_mean(actor, obs);
  const double log_std = actor.log_std(0);
  std::normal_distribution<double> normal(0.0, 1.0);
  s.action = s.mean + std::exp(log_std) * normal(rng);
  s.log_prob = gaussian_log_prob(s.action, s.mean, log_std);
  s.delta_c = action_to_rudder(s.action, delta_max_rad);
  return s;
}

}  // namespace helm
