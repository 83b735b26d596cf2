#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helm/bench.hpp"
#include "helm/errors.hpp"
#include "helm/ppo.hpp"

using namespace helm;

namespace {

const ShipModel kModel = kcs_model();

PpoConfig tiny_config() {
  PpoConfig c;
  c.actor_hidden = {8};
  c.critic_hidden = {8};
  c.episodes_per_iter = 3;
  c.iterations = 2;
  c.epochs = 2;
  c.seed = 5;
  return c;
}

RolloutBuffer manual_buffer(const std::vector<std::vector<double>>& rewards,
                            const std::vector<std::vector<double>>& values,
                            const std::vector<double>& bootstrap) {
  RolloutBuffer b;
  for (std::size_t e = 0; e < rewards.size(); ++e) {
    EpisodeSpan span;
    span.begin = b.steps.size();
    for (std::size_t t = 0; t < rewards[e].size(); ++t) {
      StepRecord s;
      s.reward = rewards[e][t];
      s.value = values[e][t];
      b.steps.push_back(s);
    }
    span.end = b.steps.size();
    span.bootstrap_value = bootstrap[e];
    span.final_status = bootstrap[e] == 0.0 ? EpisodeStatus::success : EpisodeStatus::horizon;
    b.episodes.push_back(span);
  }
  return b;
}

// A_t = sum_k (gamma lambda)^k delta_{t+k}
std::vector<double> brute_force_gae(const std::vector<double>& r, const std::vector<double>& v,
                                    double boot, double gamma, double lambda) {
  const std::size_t n = r.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      const double next = k + 1 < n ? v[k + 1] : boot;
      out[t] += w * (r[k] + gamma * next - v[k]);
      w *= gamma * lambda;
    }
  }
  return out;
}

struct Env {
  WindField wind = calm_wind();
  EpisodeConfig episode;
  EpisodeRunner runner{kModel, wind, episode};
};

ActorBatch random_batch(const MlpParams& actor, int n, std::uint64_t seed, double ratio_noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  ActorBatch b;
  b.observations.resize(4, n);
  b.actions.resize(n);
  b.old_log_probs.resize(n);
  b.advantages.resize(n);
  for (int i = 0; i < n; ++i) {
    Observation o{g(rng), g(rng), 10.0 + g(rng), 0.1 * g(rng)};
    b.observations.col(i) = observation_vector(o);
    const double mu = policy_mean(actor, o);
    b.actions(i) = mu + 0.5 * g(rng);
    b.old_log_probs(i) = gaussian_log_prob(b.actions(i), mu, actor.log_std(0)) + ratio_noise * g(rng);
    b.advantages(i) = g(rng);
  }
  return b;
}

}  // namespace

TEST(Gae, SingleTerminalStep) {
  RolloutBuffer b = manual_buffer({{3.0}}, {{1.25}}, {0.0});
  compute_gae(b, 0.96, 0.95);
  EXPECT_DOUBLE_EQ(b.advantages[0], 3.0 - 1.25);
  EXPECT_DOUBLE_EQ(b.returns[0], 3.0);
}

TEST(Gae, TwoStepHandRecursion) {
  RolloutBuffer b = manual_buffer({{1.0, 1.0}}, {{0.5, 0.5}}, {0.0});
  compute_gae(b, 0.96, 0.95);
  EXPECT_NEAR(b.advantages[1], 0.5, 1e-15);
  EXPECT_NEAR(b.advantages[0], 1.436, 1e-12);
  EXPECT_NEAR(b.returns[0], 1.936, 1e-12);
}

TEST(Gae, LambdaZeroIsTd) {
  RolloutBuffer b = manual_buffer({{1.0, -2.0, 0.5}}, {{0.1, 0.2, 0.3}}, {0.7});
  compute_gae(b, 0.9, 0.0);
  EXPECT_NEAR(b.advantages[0], 1.0 + 0.9 * 0.2 - 0.1, 1e-15);
  EXPECT_NEAR(b.advantages[1], -2.0 + 0.9 * 0.3 - 0.2, 1e-15);
  EXPECT_NEAR(b.advantages[2], 0.5 + 0.9 * 0.7 - 0.3, 1e-15);
}

TEST(Gae, MatchesBruteForceAcrossEpisodes) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<int> len(1, 10);
  std::vector<std::vector<double>> rs, vs;
  std::vector<double> boots;
  for (int e = 0; e < 50; ++e) {
    const int n = len(rng);
    std::vector<double> r(n), v(n);
    for (int t = 0; t < n; ++t) {
      r[t] = u(rng);
      v[t] = u(rng);
    }
    rs.push_back(r);
    vs.push_back(v);
    boots.push_back(e % 2 ? u(rng) : 0.0);
  }
  RolloutBuffer b = manual_buffer(rs, vs, boots);
  compute_gae(b, 0.96, 0.95);
  std::size_t k = 0;
  for (std::size_t e = 0; e < rs.size(); ++e) {
    const auto oracle = brute_force_gae(rs[e], vs[e], boots[e], 0.96, 0.95);
    for (double a : oracle) EXPECT_NEAR(b.advantages[k++], a, 1e-12);
  }
}

TEST(Gae, EmptyBufferRaises) {
  RolloutBuffer b;
  EXPECT_THROW(compute_gae(b, 0.96, 0.95), InvalidParameter);
}

TEST(LrSchedule, Halves) {
  const PpoConfig c;
  EXPECT_DOUBLE_EQ(lr_schedule(0, c), 0.001);
  EXPECT_NEAR(lr_schedule(3000, c), 0.0005, 1e-18);
  EXPECT_NEAR(lr_schedule(6000, c), 0.00025, 1e-18);
}

TEST(PpoConfig, Validation) {
  PpoConfig c;
  EXPECT_NO_THROW(c.validate());
  c.gamma = 1.5;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = PpoConfig{};
  c.clip = 0.0;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = PpoConfig{};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), InvalidParameter);
}

TEST(Policy, GaussianClosedForms) {
  EXPECT_NEAR(gaussian_entropy(0.0), 1.41894, 1e-5);
  EXPECT_NEAR(gaussian_entropy(0.0), 0.5 * std::log(2.0 * kPi * std::exp(1.0)), 1e-15);
  const double ls = std::log(0.3);
  EXPECT_NEAR(gaussian_log_prob(0.2, 0.2, ls), -std::log(0.3 * std::sqrt(2.0 * kPi)), 1e-15);
}

TEST(Policy, ActionClamp) {
  const double dmax = deg_to_rad(35.0);
  EXPECT_DOUBLE_EQ(action_to_rudder(50.0 / 35.0, dmax), dmax);
  EXPECT_DOUBLE_EQ(action_to_rudder(-3.0, dmax), -dmax);
  EXPECT_DOUBLE_EQ(action_to_rudder(0.5, dmax), 0.5 * dmax);
}

TEST(Policy, NarrowSigmaGivesMean) {
  const PpoConfig c = tiny_config();
  std::mt19937_64 rng(2);
  Learner l = make_learner(c, rng);
  l.actor.log_std(0) = -40.0;
  const Observation o{0.3, -0.2, 12.0, 0.0};
  const ActionSample s = sample_action(l.actor, o, rng, deg_to_rad(35.0));
  EXPECT_NEAR(s.action, policy_mean(l.actor, o), 1e-12);
}

TEST(ActorLoss, UnitRatioSurrogateIsMeanAdvantage) {
  const PpoConfig c = tiny_config();
  std::mt19937_64 rng(3);
  const Learner l = make_learner(c, rng);
  const ActorBatch b = random_batch(l.actor, 20, 4, 0.0);
  const ActorLoss al = actor_loss(l.actor, b, 0.2, 0.0, false);
  EXPECT_NEAR(al.surrogate, b.advantages.mean(), 1e-12);
  EXPECT_DOUBLE_EQ(al.clip_fraction, 0.0);
}

TEST(ActorLoss, RatioTwoUsesClippedAdvantage) {
  const PpoConfig c = tiny_config();
  std::mt19937_64 rng(5);
  const Learner l = make_learner(c, rng);
  ActorBatch b = random_batch(l.actor, 1, 6, 0.0);
  b.old_log_probs(0) -= std::log(2.0);
  b.advantages(0) = 1.7;
  const ActorLoss al = actor_loss(l.actor, b, 0.2, 0.0, true);
  EXPECT_NEAR(al.surrogate, 1.2 * 1.7, 1e-12);
  EXPECT_DOUBLE_EQ(al.clip_fraction, 1.0);
  // clipped branch has no gradient through the ratio
  for (const auto& layer : al.grad.layers) EXPECT_EQ(layer.weight.norm(), 0.0);
}

TEST(ActorLoss, EntropyTerm) {
  const PpoConfig c = tiny_config();
  std::mt19937_64 rng(7);
  Learner l = make_learner(c, rng);
  l.actor.log_std(0) = 0.0;
  const ActorBatch b = random_batch(l.actor, 10, 8, 0.0);
  const ActorLoss a0 = actor_loss(l.actor, b, 0.2, 0.0, false);
  const ActorLoss a1 = actor_loss(l.actor, b, 0.2, 0.2, false);
  EXPECT_NEAR(a1.entropy, 1.41894, 1e-5);
  EXPECT_NEAR(a0.loss - a1.loss, 0.2 * a1.entropy, 1e-12);
}

TEST(ActorLoss, GradientMatchesFiniteDifference) {
  PpoConfig c = tiny_config();
  c.actor_hidden = {16, 16};
  std::mt19937_64 rng(9);
  Learner l = make_learner(c, rng);
  for (auto& layer : l.actor.layers) layer.weight *= 20.0;
  const ActorBatch b = random_batch(l.actor, 32, 10, 0.3);
  const ActorLoss al = actor_loss(l.actor, b, 0.2, 0.2, true);
  const double err = finite_diff_check(
      l.actor, [&](const MlpParams& p) { return actor_loss(p, b, 0.2, 0.2, false).loss; }, al.grad, 1e-5);
  EXPECT_LT(err, 1e-5);
}

TEST(ActorLoss, InfiniteClipIsVanillaPolicyGradient) {
  const PpoConfig c = tiny_config();
  std::mt19937_64 rng(11);
  const Learner l = make_learner(c, rng);
  const ActorBatch b = random_batch(l.actor, 16, 12, 0.4);
  const ActorLoss al = actor_loss(l.actor, b, 1e12, 0.0, true);
  double oracle = 0.0;
  for (int i = 0; i < 16; ++i) {
    Observation o{b.observations(0, i), b.observations(1, i), b.observations(2, i), b.observations(3, i)};
    const double lp = gaussian_log_prob(b.actions(i), policy_mean(l.actor, o), l.actor.log_std(0));
    oracle += std::exp(lp - b.old_log_probs(i)) * b.advantages(i);
  }
  EXPECT_NEAR(al.surrogate, oracle / 16.0, 1e-12);
  const double err = finite_diff_check(
      l.actor, [&](const MlpParams& p) { return actor_loss(p, b, 1e12, 0.0, false).loss; }, al.grad, 1e-5);
  EXPECT_LT(err, 1e-5);
}

TEST(CriticLoss, GradientMatchesFiniteDifference) {
  PpoConfig c = tiny_config();
  c.critic_hidden = {16, 16};
  std::mt19937_64 rng(13);
  const Learner l = make_learner(c, rng);
  std::normal_distribution<double> g(0.0, 1.0);
  const Eigen::MatrixXd obs = Eigen::MatrixXd::NullaryExpr(4, 24, [&] { return g(rng); });
  const Eigen::VectorXd ret = Eigen::VectorXd::NullaryExpr(24, [&] { return 5.0 * g(rng); });
  const CriticLoss cl = critic_loss(l.critic, obs, ret, 0.5, true);
  const double err = finite_diff_check(
      l.critic, [&](const MlpParams& p) { return critic_loss(p, obs, ret, 0.5, false).loss; }, cl.grad,
      1e-5);
  EXPECT_LT(err, 1e-5);
}

TEST(SelectPolicy, Rules) {
  const std::vector<CandidateScore> one{{7, 0.5, 1.0}};
  EXPECT_EQ(select_policy(one), 0u);
  const std::vector<CandidateScore> c{{1, 0.8, 0.3}, {2, 0.9, 0.5}, {3, 0.9, 0.4}, {4, 0.9, 0.4}, {5, 0.1, 0.01}};
  EXPECT_EQ(select_policy(c), 2u);
  EXPECT_THROW(select_policy(std::span<const CandidateScore>{}), InvalidParameter);
}

TEST(Collect, ShapeAndDeterminism) {
  const PpoConfig c = tiny_config();
  std::mt19937_64 rng(15);
  const Learner l = make_learner(c, rng);
  Env env;
  const RolloutBuffer a = collect_iteration(l.actor, l.critic, env.runner, 100, 4, 1);
  const RolloutBuffer b = collect_iteration(l.actor, l.critic, env.runner, 100, 4, 3);
  ASSERT_EQ(a.episodes.size(), 4u);
  EXPECT_TRUE(a.boundaries_valid());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.steps[i].obs, b.steps[i].obs);
    EXPECT_EQ(a.steps[i].action, b.steps[i].action);
    EXPECT_EQ(a.steps[i].reward, b.steps[i].reward);
  }
  for (const auto& e : a.episodes) {
    EXPECT_LE(e.end - e.begin, 160u);
    EXPECT_NE(e.final_status, EpisodeStatus::running);
    if (e.final_status != EpisodeStatus::horizon) EXPECT_EQ(e.bootstrap_value, 0.0);
  }
}

TEST(Update, NonFiniteLeavesLearnerUntouched) {
  const PpoConfig c = tiny_config();
  std::mt19937_64 rng(17);
  Learner l = make_learner(c, rng);
  Env env;
  RolloutBuffer buf = collect_iteration(l.actor, l.critic, env.runner, 0, 2, 1);
  buf.steps[0].reward = std::nan("");
  compute_gae(buf, c.gamma, c.lambda);
  const Learner before = l;
  EXPECT_THROW(ppo_update(l, buf, c, rng), NonFiniteLoss);
  EXPECT_EQ(l.actor, before.actor);
  EXPECT_EQ(l.critic, before.critic);
  EXPECT_EQ(l.global_step, before.global_step);
}

TEST(Update, StepsAdamAndLr) {
  const PpoConfig c = tiny_config();
  std::mt19937_64 rng(19);
  Learner l = make_learner(c, rng);
  Env env;
  RolloutBuffer buf = collect_iteration(l.actor, l.critic, env.runner, 0, 2, 1);
  compute_gae(buf, c.gamma, c.lambda);
  const MlpParams before = l.actor;
  const UpdateStats st = ppo_update(l, buf, c, rng);
  EXPECT_EQ(st.updates, c.epochs);
  EXPECT_EQ(l.global_step, c.epochs);
  EXPECT_FALSE(l.actor == before);
  EXPECT_TRUE(std::isfinite(st.actor_loss));
}

TEST(Train, SmokeRunIsDeterministic) {
  const PpoConfig c = tiny_config();
  Env env;
  std::vector<Checkpoint> ckpts;
  const TrainResult a = train(c, env.runner, [&](const TrainLogRow&, const Checkpoint& k) { ckpts.push_back(k); });
  const TrainResult b = train(c, env.runner);
  ASSERT_EQ(a.log.size(), 2u);
  ASSERT_EQ(ckpts.size(), 2u);
  EXPECT_EQ(ckpts[1].iteration, 2u);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].iteration, static_cast<int>(i) + 1);
    EXPECT_EQ(a.log[i].mean_return, b.log[i].mean_return);
    EXPECT_EQ(a.log[i].actor_loss, b.log[i].actor_loss);
  }
  EXPECT_EQ(a.final_learner.actor, b.final_learner.actor);
}

TEST(Checkpoint, RoundTripReproducesActions) {
  const PpoConfig c = tiny_config();
  std::mt19937_64 rng(21);
  const Learner l = make_learner(c, rng);
  Checkpoint k;
  k.iteration = 9;
  k.global_step = 90;
  k.rng_state = "state";
  k.actor = l.actor;
  k.critic = l.critic;
  k.actor_adam = l.actor_adam;
  k.critic_adam = l.critic_adam;
  std::stringstream ss;
  write_checkpoint(ss, k);
  const Checkpoint r = read_checkpoint(ss);
  EXPECT_EQ(r.iteration, 9u);
  EXPECT_EQ(r.global_step, 90);
  EXPECT_EQ(r.rng_state, "state");
  EXPECT_EQ(r.actor, k.actor);
  EXPECT_EQ(r.critic, k.critic);
  Env env;
  const PolicyEvaluation e1 = evaluate_policy(k.actor, env.runner, 1000, 3, 1);
  const PolicyEvaluation e2 = evaluate_policy(r.actor, env.runner, 1000, 3, 1);
  EXPECT_EQ(e1.mean_return, e2.mean_return);
}

TEST(Checkpoint, RejectsGarbage) {
  std::istringstream bad("not a checkpoint at all");
  EXPECT_THROW(read_checkpoint(bad), InvalidParameter);
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.bin"), InvalidParameter);
}
