#include "helm/mdp.hpp"

#include <cmath>

#include "helm/errors.hpp"
#include "helm/guidance.hpp"

namespace helm {

void EpisodeConfig::validate() const {
  if (horizon <= 0) throw InvalidParameter("episode horizon must be positive");
  if (!(goal_distance_min_L > 0.0 && goal_distance_min_L <= goal_distance_max_L)) {
    throw InvalidParameter("goal distance range must satisfy 0 < min <= max");
  }
  if (!(goal_bearing_min <= goal_bearing_max)) {
    throw InvalidParameter("goal bearing range must satisfy min <= max");
  }
  if (!(tolerance_L > 0.0)) throw InvalidParameter("goal tolerance must be positive");
  if (!(initial_u_prime >= 0.0)) throw InvalidParameter("initial surge speed must be non-negative");
  if (!(dt_prime > 0.0)) throw InvalidParameter("dt' must be positive");
  if (!(overshoot_guard_L >= 0.0)) throw InvalidParameter("overshoot guard must be non-negative");
}

std::string_view to_string(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::running: return "running";
    case EpisodeStatus::success: return "success";
    case EpisodeStatus::overshoot: return "overshoot";
    case EpisodeStatus::horizon: return "horizon";
  }
  return "unknown";
}

EpisodeContext make_context(Vec2 start, Vec2 destination) {
  return {start, destination, destination - start, 0};
}

ResetResult reset(const EpisodeConfig& config, const ShipModel& model, EpisodeRng& rng) {
  const double length = model.principal.length_m;
  std::uniform_real_distribution<double> dist(config.goal_distance_min_L, config.goal_distance_max_L);
  std::uniform_real_distribution<double> bearing(config.goal_bearing_min, config.goal_bearing_max);
  const double d = dist(rng) * length;
  const double b = bearing(rng);

  ResetResult out;
  out.state.psi = wrap_angle(config.initial_psi);
  out.state.u = config.initial_u_prime * model.principal.design_speed_mps;
  out.state.n_p = model.actuator.propeller_rps;
  out.context = make_context({0.0, 0.0}, {d * std::cos(b), d * std::sin(b)});
  out.observation = observe(out.state, out.context, model);
  return out;
}

Observation observe(const ShipState& state, const EpisodeContext& ctx, const ShipModel& model) {
  const double length = model.principal.length_m;
  const Vec2 pos = state.position();
  Observation obs;
  obs.d_c = ctx.start == ctx.destination
                ? 0.0
                : cross_track_error(pos, ctx.start, ctx.destination) / length;
  obs.chi_e = course_error(state, ctx.destination);
  obs.d_wp = distance_to_waypoint(pos, ctx.destination) / length;
  obs.r = prime_ii_convert(state.r, Quantity::yaw_rate, Normalization::to_prime, model.principal,
                           model.principal.design_speed_mps);
  return obs;
}

RewardBreakdown reward(const Observation& obs) {
  RewardBreakdown rb;
  rb.r1 = 2.0 * std::exp(-obs.d_c * obs.d_c / 12.5) - 1.0;
  rb.r2 = 1.3 * std::exp(-10.0 * std::abs(obs.chi_e)) - 0.3;
  rb.r3 = -obs.d_wp / 4.0;
  rb.total = rb.r1 + rb.r2 + rb.r3;
  return rb;
}

EpisodeStatus is_terminal(const ShipState& state, const EpisodeContext& ctx,
                          const EpisodeConfig& config, const ShipModel& model) {
  const double length = model.principal.length_m;
  const Vec2 pos = state.position();
  const Vec2 v2 = ctx.destination - pos;
  if (v2.norm() < config.tolerance_L * length) return EpisodeStatus::success;
  const bool moved = (pos - ctx.start).norm() >= config.overshoot_guard_L * length;
  if (moved && ctx.v1.dot(v2) < 0.0 && state.ground_velocity().dot(v2) < 0.0) {
    return EpisodeStatus::overshoot;
  }
  if (ctx.step_count >= config.horizon) return EpisodeStatus::horizon;
  return EpisodeStatus::running;
}

StepResult env_step(const ShipState& state, const EpisodeContext& ctx, double delta_command,
                    const ShipModel& model, const WindField& wind, const EpisodeConfig& config) {
  StepResult out;
  out.state = step(state, delta_command, wind, model, dimensional_dt(model, config.dt_prime));
  out.context = ctx;
  ++out.context.step_count;
  out.observation = observe(out.state, out.context, model);
  out.reward = reward(out.observation);
  out.status = is_terminal(out.state, out.context, config, model);
  if (out.status == EpisodeStatus::success) {
    out.reward.terminal_bonus = kSuccessBonus;
    out.reward.total += kSuccessBonus;
  }
  return out;
}

}  // namespace helm
