#pragma once

#include <Eigen/Dense>

#include <random>

#include "helm/mdp.hpp"
#include "helm/mlp.hpp"

namespace helm {

// Gaussian policy head over one normalised action a. The actor network's
// single output z gives the mean mu = tanh(z) in (-1, 1); the commanded
// rudder is clamp(a, -1, 1) * delta_max. sigma = exp(log_std) is a free
// parameter stored with the actor.

inline constexpr double kLogSqrtTwoPi = 0.91893853320467274178;  // 0.5 ln(2 pi)

Eigen::VectorXd observation_vector(const Observation& obs);

/// Mean of the normalised action.
double policy_mean(const MlpParams& actor, const Observation& obs);

double gaussian_log_prob(double action, double mean, double log_std);

/// Differential entropy of a 1-D Gaussian, 0.5 ln(2 pi e) + log_std.
double gaussian_entropy(double log_std);

/// Normalised action to commanded rudder angle (rad), clamped to +-delta_max.
double action_to_rudder(double action, double delta_max_rad);

struct ActionSample {
  double delta_c = 0.0;   ///< clamped rudder command (rad)
  double action = 0.0;    ///< unclamped normalised Gaussian draw
  double log_prob = 0.0;  ///< log density of the unclamped draw
  double mean = 0.0;
};

ActionSample sample_action(const MlpParams& actor, const Observation& obs, std::mt19937_64& rng,
                           double delta_max_rad);

}  // namespace helm
