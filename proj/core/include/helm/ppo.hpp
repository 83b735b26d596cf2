#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "helm/checkpoint.hpp"
#include "helm/mdp.hpp"
#include "helm/mlp.hpp"
#include "helm/policy.hpp"

namespace helm {

struct PpoConfig {
  double lr0 = 0.001;
  double decay_steps = 3000.0;
  double decay_rate = 0.5;
  double gamma = 0.96;
  double lambda = 0.95;
  double clip = 0.2;
  double entropy_coef = 0.2;
  int epochs = 10;
  int episodes_per_iter = 50;
  int iterations = 100;
  double value_coef = 0.5;
  int minibatch_size = 0;  ///< 0 = full batch
  std::vector<int> actor_hidden{128, 128};
  std::vector<int> critic_hidden{128, 128};
  double actor_output_gain = 0.01;
  double initial_std = 0.5;  ///< in normalised action units (1 = delta_max)
  int selection_episodes = 100;
  int max_consecutive_failures = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Continuous exponential decay lr0 * rate^(step / decay_steps).
double lr_schedule(std::int64_t step, const PpoConfig& config);

struct StepRecord {
  Observation obs;
  double action = 0.0;    ///< unclamped normalised action
  double log_prob = 0.0;  ///< under the behaviour policy
  double reward = 0.0;    ///< total, including any success bonus
  double value = 0.0;
  EpisodeStatus status = EpisodeStatus::running;
};

struct EpisodeSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  ///< one past the last step
  EpisodeStatus final_status = EpisodeStatus::running;
  double bootstrap_value = 0.0;  ///< V(s_T) for horizon cut-offs, else 0
  double return_total = 0.0;
  double return_no_bonus = 0.0;
  double rms_cross_track_L = 0.0;
};

struct RolloutBuffer {
  std::vector<StepRecord> steps;
  std::vector<EpisodeSpan> episodes;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return steps.size(); }
  /// Episodes cover [0, size()) contiguously and in order.
  bool boundaries_valid() const;
  double success_rate() const;
  double mean_return() const;
  double mean_return_no_bonus() const;
};

/// GAE(lambda) per episode, bootstrapping with EpisodeSpan::bootstrap_value.
/// Throws InvalidParameter on an empty buffer.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

struct ActorBatch {
  Eigen::MatrixXd observations;  ///< 4 x N
  Eigen::VectorXd actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
};

struct ActorLoss {
  double loss = 0.0;
  double surrogate = 0.0;  ///< mean clipped surrogate (to be maximised)
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  MlpParams grad;
};

/// -mean(min(rho A, clip(rho, 1 -+ eps) A)) - c_ent * entropy, with its
/// exact gradient (including log_std) when with_grad is set.
ActorLoss actor_loss(const MlpParams& actor, const ActorBatch& batch, double clip,
                     double entropy_coef, bool with_grad);

struct CriticLoss {
  double loss = 0.0;
  MlpParams grad;
};

/// value_coef * mean((V - returns)^2).
CriticLoss critic_loss(const MlpParams& critic, const Eigen::MatrixXd& observations,
                       const Eigen::VectorXd& returns, double value_coef, bool with_grad);

/// Raised when an update produces a non-finite loss or gradient.
class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised after too many consecutive failed iterations.
class TrainingFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double lr = 0.0;
  int updates = 0;
};

struct Learner {
  MlpParams actor;
  MlpParams critic;
  AdamState actor_adam;
  AdamState critic_adam;
  std::int64_t global_step = 0;
};

Learner make_learner(const PpoConfig& config, std::mt19937_64& rng);

/// Normalises advantages, then runs config.epochs passes of clipped-surrogate
/// and value regression updates. The learner is left untouched on
/// NonFiniteLoss.
UpdateStats ppo_update(Learner& learner, const RolloutBuffer& buffer, const PpoConfig& config,
                       std::mt19937_64& rng);

/// Worker threads for rollouts: HELM_RL_THREADS when set, else hardware
/// concurrency.
int rollout_threads();

struct EpisodeRunner {
  const ShipModel& model;
  const WindField& wind;
  const EpisodeConfig& episode;
};

/// Runs n stochastic episodes; episode i uses seed first_seed + i.
RolloutBuffer collect_iteration(const MlpParams& actor, const MlpParams& critic,
                                const EpisodeRunner& env, std::uint64_t first_seed, int n,
                                int threads = 0);

struct TrainLogRow {
  int iteration = 0;
  double mean_return = 0.0;
  double mean_return_no_bonus = 0.0;
  double success_rate = 0.0;
  double mean_episode_length = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double log_std = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double lr = 0.0;
  std::string status;  ///< "ok" or "nonfinite"
};

/// Called after every iteration with its log row and checkpoint.
using TrainObserver = std::function<void(const TrainLogRow&, const Checkpoint&)>;

struct TrainResult {
  std::vector<TrainLogRow> log;
  Learner final_learner;
};

/// config.iterations rounds of collect -> GAE -> update. Throws
/// TrainingFailed after config.max_consecutive_failures non-finite updates in
/// a row.
TrainResult train(const PpoConfig& config, const EpisodeRunner& env, const TrainObserver& observer = {});

/// Seed offsets keeping training, selection and fresh evaluation disjoint.
inline constexpr std::uint64_t kSelectionSeedOffset = 1'000'000'000ULL;
inline constexpr std::uint64_t kFreshSeedOffset = 2'000'000'000ULL;

struct PolicyEvaluation {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_rms_cross_track_L = 0.0;
  double mean_return = 0.0;
};

/// Deterministic (mean-action) episodes with seeds first_seed + i.
PolicyEvaluation evaluate_policy(const MlpParams& actor, const EpisodeRunner& env,
                                 std::uint64_t first_seed, int n, int threads = 0);

struct CandidateScore {
  std::uint32_t iteration = 0;
  double success_rate = 0.0;
  double rms_cross_track_L = 0.0;
};

/// Highest success rate; ties go to lower RMS cross-track, then the earlier
/// iteration. Throws InvalidParameter on an empty list.
std::size_t select_policy(std::span<const CandidateScore> candidates);

}  // namespace helm
