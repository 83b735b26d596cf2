#include "helm/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

#include "helm/errors.hpp"

namespace helm {

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidParameter("gamma must be in (0, 1]");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidParameter("lambda must be in (0, 1]");
  if (!(clip > 0.0)) throw InvalidParameter("clip must be positive");
  if (!(lr0 > 0.0)) throw InvalidParameter("lr0 must be positive");
  if (!(decay_steps > 0.0)) throw InvalidParameter("decay_steps must be positive");
  if (!(decay_rate > 0.0 && decay_rate <= 1.0)) throw InvalidParameter("decay_rate must be in (0, 1]");
  if (!(entropy_coef >= 0.0)) throw InvalidParameter("entropy_coef must be non-negative");
  if (!(value_coef > 0.0)) throw InvalidParameter("value_coef must be positive");
  if (epochs <= 0 || episodes_per_iter <= 0 || iterations <= 0 || selection_episodes <= 0 ||
      max_consecutive_failures <= 0) {
    throw InvalidParameter("ppo counts must be positive");
  }
  if (minibatch_size < 0) throw InvalidParameter("minibatch_size must be non-negative");
  if (actor_hidden.empty() || critic_hidden.empty()) {
    throw InvalidParameter("networks need at least one hidden layer");
  }
  for (int h : actor_hidden) {
    if (h <= 0) throw InvalidParameter("hidden sizes must be positive");
  }
  for (int h : critic_hidden) {
    if (h <= 0) throw InvalidParameter("hidden sizes must be positive");
  }
  if (!(actor_output_gain > 0.0)) throw InvalidParameter("actor_output_gain must be positive");
  if (!(initial_std > 0.0)) throw InvalidParameter("initial_std must be positive");
}

double lr_schedule(std::int64_t step, const PpoConfig& config) {
  if (step < 0) throw InvalidParameter("lr_schedule step must be non-negative");
  return config.lr0 * std::pow(config.decay_rate, static_cast<double>(step) / config.decay_steps);
}

bool RolloutBuffer::boundaries_valid() const {
  std::size_t next = 0;
  for (const auto& e : episodes) {
    if (e.begin != next || e.end <= e.begin) return false;
    next = e.end;
  }
  return next == steps.size();
}

double RolloutBuffer::success_rate() const {
  if (episodes.empty()) return 0.0;
  const auto n = std::count_if(episodes.begin(), episodes.end(), [](const EpisodeSpan& e) {
    return e.final_status == EpisodeStatus::success;
  });
  return static_cast<double>(n) / static_cast<double>(episodes.size());
}

double RolloutBuffer::mean_return() const {
  if (episodes.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : episodes) s += e.return_total;
  return s / static_cast<double>(episodes.size());
}

double RolloutBuffer::mean_return_no_bonus() const {
  if (episodes.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : episodes) s += e.return_no_bonus;
  return s / static_cast<double>(episodes.size());
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda) {
  if (buffer.steps.empty()) throw InvalidParameter("compute_gae on an empty buffer");
  if (!buffer.boundaries_valid()) throw InvalidParameter("rollout episode boundaries are inconsistent");
  buffer.advantages.assign(buffer.size(), 0.0);
  buffer.returns.assign(buffer.size(), 0.0);
  for (const auto& e : buffer.episodes) {
    double next_value = e.bootstrap_value;
    double next_adv = 0.0;
    for (std::size_t t = e.end; t-- > e.begin;) {
      const auto& s = buffer.steps[t];
      const double delta = s.reward + gamma * next_value - s.value;
      next_adv = delta + gamma * lambda * next_adv;
      buffer.advantages[t] = next_adv;
      buffer.returns[t] = next_adv + s.value;
      next_value = s.value;
    }
  }
}

ActorLoss actor_loss(const MlpParams& actor, const ActorBatch& batch, double clip,
                     double entropy_coef, bool with_grad) {
  if (actor.log_std.size() != 1) throw NotReady("actor has no Gaussian head");
  const auto n = batch.observations.cols();
  if (n == 0 || batch.actions.size() != n || batch.old_log_probs.size() != n ||
      batch.advantages.size() != n) {
    throw InvalidParameter("actor batch is empty or has mismatched sizes");
  }
  ForwardCache cache;
  const Eigen::MatrixXd z = forward(actor, batch.observations, with_grad ? &cache : nullptr);
  const double log_std = actor.log_std(0);
  const double inv_var = std::exp(-2.0 * log_std);
  const double inv_n = 1.0 / static_cast<double>(n);

  ActorLoss out;
  Eigen::MatrixXd upstream(1, n);
  double d_log_std = 0.0;
  double surrogate = 0.0;
  double kl = 0.0;
  int clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = std::tanh(z(0, i));
    const double diff = batch.actions(i) - mu;
    const double logp = gaussian_log_prob(batch.actions(i), mu, log_std);
    const double log_ratio = logp - batch.old_log_probs(i);
    const double ratio = std::exp(log_ratio);
    const double adv = batch.advantages(i);
    const double unclipped = ratio * adv;
    const double clipped_term = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
    surrogate += std::min(unclipped, clipped_term);
    kl += (ratio - 1.0) - log_ratio;
    if (std::abs(ratio - 1.0) > clip) ++clipped;
    // d(surrogate)/d(logp) is ratio * A on the unclipped branch, else zero
    const double g = unclipped <= clipped_term ? unclipped : 0.0;
    upstream(0, i) = -inv_n * g * diff * inv_var * (1.0 - mu * mu);
    d_log_std += -inv_n * g * (diff * diff * inv_var - 1.0);
  }
  out.surrogate = surrogate * inv_n;
  out.entropy = gaussian_entropy(log_std);
  out.loss = -out.surrogate - entropy_coef * out.entropy;
  out.approx_kl = kl * inv_n;
  out.clip_fraction = static_cast<double>(clipped) * inv_n;
  if (with_grad) {
    out.grad = gradients(actor, cache, upstream);
    out.grad.log_std(0) = d_log_std - entropy_coef;
  }
  return out;
}

CriticLoss critic_loss(const MlpParams& critic, const Eigen::MatrixXd& observations,
                       const Eigen::VectorXd& returns, double value_coef, bool with_grad) {
  const auto n = observations.cols();
  if (n == 0 || returns.size() != n) throw InvalidParameter("critic batch is empty or mismatched");
  ForwardCache cache;
  const Eigen::MatrixXd v = forward(critic, observations, with_grad ? &cache : nullptr);
  const Eigen::RowVectorXd err = v.row(0) - returns.transpose();
  CriticLoss out;
  out.loss = value_coef * err.squaredNorm() / static_cast<double>(n);
  if (with_grad) {
    const Eigen::MatrixXd upstream = (2.0 * value_coef / static_cast<double>(n)) * err;
    out.grad = gradients(critic, cache, upstream);
  }
  return out;
}

Learner make_learner(const PpoConfig& config, std::mt19937_64& rng) {
  std::vector<int> actor_sizes{Observation::kSize};
  actor_sizes.insert(actor_sizes.end(), config.actor_hidden.begin(), config.actor_hidden.end());
  actor_sizes.push_back(1);
  std::vector<int> critic_sizes{Observation::kSize};
  critic_sizes.insert(critic_sizes.end(), config.critic_hidden.begin(), config.critic_hidden.end());
  critic_sizes.push_back(1);

  Learner l;
  l.actor = make_mlp(actor_sizes, rng, {1.0, config.actor_output_gain, 1, std::log(config.initial_std)});
  l.critic = make_mlp(critic_sizes, rng, {1.0, 1.0, 0, 0.0});
  l.actor_adam = AdamState::for_params(l.actor);
  l.critic_adam = AdamState::for_params(l.critic);
  return l;
}

namespace {

bool all_finite(const MlpParams& p) {
  bool ok = true;
  for_each_tensor([&](const auto& t) { ok = ok && t.allFinite(); }, p);
  return ok;
}

template <typename Vec>
Vec gather(const Vec& src, std::span<const Eigen::Index> idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = src(idx[i]);
  return out;
}

Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& src, std::span<const Eigen::Index> idx) {
  Eigen::MatrixXd out(src.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = src.col(idx[i]);
  return out;
}

}  // namespace

UpdateStats ppo_update(Learner& learner, const RolloutBuffer& buffer, const PpoConfig& config,
                       std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(buffer.size());
  if (n == 0) throw InvalidParameter("ppo_update on an empty buffer");
  if (buffer.advantages.size() != buffer.size() || buffer.returns.size() != buffer.size()) {
    throw InvalidParameter("ppo_update needs advantages and returns; run compute_gae first");
  }

  ActorBatch full;
  full.observations.resize(Observation::kSize, n);
  full.actions.resize(n);
  full.old_log_probs.resize(n);
  full.advantages.resize(n);
  Eigen::VectorXd returns(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = buffer.steps[static_cast<std::size_t>(i)];
    full.observations.col(i) = observation_vector(s.obs);
    full.actions(i) = s.action;
    full.old_log_probs(i) = s.log_prob;
    full.advantages(i) = buffer.advantages[static_cast<std::size_t>(i)];
    returns(i) = buffer.returns[static_cast<std::size_t>(i)];
  }
  const double mean = full.advantages.mean();
  const double var = n > 1 ? (full.advantages.array() - mean).square().sum() / static_cast<double>(n) : 0.0;
  full.advantages = (full.advantages.array() - mean) / (std::sqrt(var) + 1e-8);

  Learner work = learner;
  UpdateStats stats;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::Index mb = config.minibatch_size > 0 && config.minibatch_size < n ? config.minibatch_size : n;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (mb < n) std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index begin = 0; begin < n; begin += mb) {
      const Eigen::Index count = std::min(mb, n - begin);
      ActorBatch batch;
      Eigen::VectorXd batch_returns;
      if (count == n) {
        batch = full;
        batch_returns = returns;
      } else {
        const std::span<const Eigen::Index> idx(order.data() + begin, static_cast<std::size_t>(count));
        batch.observations = gather_cols(full.observations, idx);
        batch.actions = gather(full.actions, idx);
        batch.old_log_probs = gather(full.old_log_probs, idx);
        batch.advantages = gather(full.advantages, idx);
        batch_returns = gather(returns, idx);
      }
      const ActorLoss al = actor_loss(work.actor, batch, config.clip, config.entropy_coef, true);
      const CriticLoss cl = critic_loss(work.critic, batch.observations, batch_returns, config.value_coef, true);
      if (!std::isfinite(al.loss) || !std::isfinite(cl.loss) || !all_finite(al.grad) ||
          !all_finite(cl.grad)) {
        std::ostringstream msg;
        msg << "non-finite loss at update " << work.global_step << " (actor " << al.loss << ", critic "
            << cl.loss << ")";
        throw NonFiniteLoss(msg.str());
      }
      const double lr = lr_schedule(work.global_step, config);
      adam_step(work.actor, al.grad, work.actor_adam, lr);
      adam_step(work.critic, cl.grad, work.critic_adam, lr);
      ++work.global_step;

      stats.actor_loss += al.loss;
      stats.critic_loss += cl.loss;
      stats.entropy += al.entropy;
      stats.approx_kl += al.approx_kl;
      stats.clip_fraction += al.clip_fraction;
      stats.lr = lr;
      ++stats.updates;
    }
  }
  if (!all_finite(work.actor) || !all_finite(work.critic)) {
    throw NonFiniteLoss("parameters became non-finite during the update");
  }
  const double k = 1.0 / static_cast<double>(stats.updates);
  stats.actor_loss *= k;
  stats.critic_loss *= k;
  stats.entropy *= k;
  stats.approx_kl *= k;
  stats.clip_fraction *= k;
  learner = std::move(work);
  return stats;
}

int rollout_threads() {
  const int hw = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("HELM_RL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min<long>(v, hw));
  }
  return hw;
}

namespace {

struct EpisodeRecord {
  std::vector<StepRecord> steps;
  EpisodeSpan span;
};

double critic_value(const MlpParams& critic, const Observation& obs) {
  return forward(critic, observation_vector(obs))(0);
}

// Runs one episode. With a critic the actions are sampled; without one the
// mean action is used and values are left at zero.
EpisodeRecord run_episode(const MlpParams& actor, const MlpParams* critic, const EpisodeRunner& env,
                          std::uint64_t seed) {
  EpisodeRng rng(seed);
  ResetResult start = reset(env.episode, env.model, rng);
  ShipState state = start.state;
  EpisodeContext ctx = start.context;
  Observation obs = start.observation;
  const double delta_max = env.model.actuator.delta_max_rad;

  EpisodeRecord rec;
  rec.steps.reserve(static_cast<std::size_t>(env.episode.horizon));
  double sum_dc2 = 0.0;
  while (true) {
    StepRecord s;
    s.obs = obs;
    double delta_c = 0.0;
    if (critic) {
      const ActionSample a = sample_action(actor, obs, rng, delta_max);
      s.action = a.action;
      s.log_prob = a.log_prob;
      s.value = critic_value(*critic, obs);
      delta_c = a.delta_c;
    } else {
      s.action = policy_mean(actor, obs);
      delta_c = action_to_rudder(s.action, delta_max);
    }
    StepResult r;
    try {
      r = env_step(state, ctx, delta_c, env.model, env.wind, env.episode);
    } catch (const NumericalBlowup& e) {
      throw NumericalBlowup("episode seed " + std::to_string(seed) + ": " + e.what(), e.state());
    }
    s.reward = r.reward.total;
    s.status = r.status;
    rec.span.return_total += r.reward.total;
    rec.span.return_no_bonus += r.reward.total - r.reward.terminal_bonus;
    sum_dc2 += r.observation.d_c * r.observation.d_c;
    rec.steps.push_back(s);
    state = r.state;
    ctx = r.context;
    obs = r.observation;
    if (r.status != EpisodeStatus::running) {
      rec.span.final_status = r.status;
      if (r.status == EpisodeStatus::horizon && critic) rec.span.bootstrap_value = critic_value(*critic, obs);
      break;
    }
  }
  rec.span.rms_cross_track_L = std::sqrt(sum_dc2 / static_cast<double>(rec.steps.size()));
  return rec;
}

std::vector<EpisodeRecord> run_episodes(const MlpParams& actor, const MlpParams* critic,
                                        const EpisodeRunner& env, std::uint64_t first_seed, int n,
                                        int threads) {
  env.episode.validate();
  if (n <= 0) throw InvalidParameter("episode count must be positive");
  std::vector<EpisodeRecord> out(static_cast<std::size_t>(n));
  const int workers = std::clamp(threads > 0 ? threads : rollout_threads(), 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = run_episode(actor, critic, env, first_seed + i);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) {
          out[static_cast<std::size_t>(i)] = run_episode(actor, critic, env, first_seed + i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

RolloutBuffer collect_iteration(const MlpParams& actor, const MlpParams& critic,
                                const EpisodeRunner& env, std::uint64_t first_seed, int n,
                                int threads) {
  if (critic.empty()) throw NotReady("critic has no weights");
  auto episodes = run_episodes(actor, &critic, env, first_seed, n, threads);
  RolloutBuffer buf;
  for (auto& e : episodes) {
    e.span.begin = buf.steps.size();
    buf.steps.insert(buf.steps.end(), e.steps.begin(), e.steps.end());
    e.span.end = buf.steps.size();
    buf.episodes.push_back(e.span);
  }
  return buf;
}

PolicyEvaluation evaluate_policy(const MlpParams& actor, const EpisodeRunner& env,
                                 std::uint64_t first_seed, int n, int threads) {
  const auto episodes = run_episodes(actor, nullptr, env, first_seed, n, threads);
  PolicyEvaluation ev;
  ev.episodes = n;
  for (const auto& e : episodes) {
    if (e.span.final_status == EpisodeStatus::success) ev.success_rate += 1.0;
    ev.mean_rms_cross_track_L += e.span.rms_cross_track_L;
    ev.mean_return += e.span.return_total;
  }
  ev.success_rate /= n;
  ev.mean_rms_cross_track_L /= n;
  ev.mean_return /= n;
  return ev;
}

TrainResult train(const PpoConfig& config, const EpisodeRunner& env, const TrainObserver& observer) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  TrainResult result;
  result.final_learner = make_learner(config, rng);
  Learner& learner = result.final_learner;
  int failures = 0;

  for (int it = 0; it < config.iterations; ++it) {
    const std::uint64_t first_seed =
        config.seed + static_cast<std::uint64_t>(it) * static_cast<std::uint64_t>(config.episodes_per_iter);
    RolloutBuffer buf = collect_iteration(learner.actor, learner.critic, env, first_seed, config.episodes_per_iter);
    compute_gae(buf, config.gamma, config.lambda);

    TrainLogRow row;
    row.iteration = it + 1;
    row.mean_return = buf.mean_return();
    row.mean_return_no_bonus = buf.mean_return_no_bonus();
    row.success_rate = buf.success_rate();
    row.mean_episode_length = static_cast<double>(buf.size()) / static_cast<double>(buf.episodes.size());
    try {
      const UpdateStats st = ppo_update(learner, buf, config, rng);
      row.actor_loss = st.actor_loss;
      row.critic_loss = st.critic_loss;
      row.entropy = st.entropy;
      row.approx_kl = st.approx_kl;
      row.clip_fraction = st.clip_fraction;
      row.lr = st.lr;
      row.status = "ok";
      failures = 0;
    } catch (const NonFiniteLoss& e) {
      row.actor_loss = std::nan("");
      row.critic_loss = std::nan("");
      row.entropy = gaussian_entropy(learner.actor.log_std(0));
      row.lr = lr_schedule(learner.global_step, config);
      row.status = "nonfinite";
      if (++failures >= config.max_consecutive_failures) {
        throw TrainingFailed("training aborted after " + std::to_string(failures) +
                             " consecutive non-finite updates: " + e.what());
      }
    }
    row.log_std = learner.actor.log_std(0);
    result.log.push_back(row);

    if (observer) {
      Checkpoint ckpt;
      ckpt.iteration = static_cast<std::uint32_t>(it + 1);
      ckpt.global_step = learner.global_step;
      std::ostringstream rs;
      rs << rng;
      ckpt.rng_state = rs.str();
      ckpt.actor = learner.actor;
      ckpt.critic = learner.critic;
      ckpt.actor_adam = learner.actor_adam;
      ckpt.critic_adam = learner.critic_adam;
      observer(row, ckpt);
    }
  }
  return result;
}

std::size_t select_policy(std::span<const CandidateScore> candidates) {
  if (candidates.empty()) throw InvalidParameter("select_policy needs at least one candidate");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& b = candidates[best];
    if (c.success_rate != b.success_rate) {
      if (c.success_rate > b.success_rate) best = i;
    } else if (c.rms_cross_track_L != b.rms_cross_track_L) {
      if (c.rms_cross_track_L < b.rms_cross_track_L) best = i;
    } else if (c.iteration < b.iteration) {
      best = i;
    }
  }
  return best;
}

}  // namespace helm
