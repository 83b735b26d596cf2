#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

#include "helm/angles.hpp"
#include "helm/dynamics.hpp"
#include "helm/ship.hpp"
#include "helm/wind.hpp"

namespace helm {

/// Agent input [d_c, chi_e, d_wp, r]: d_c and d_wp in ship lengths, chi_e in
/// radians, r non-dimensional with the design speed as reference.
struct Observation {
  double d_c = 0.0;
  double chi_e = 0.0;
  double d_wp = 0.0;
  double r = 0.0;

  static constexpr int kSize = 4;
  std::array<double, kSize> as_array() const { return {d_c, chi_e, d_wp, r}; }
  bool operator==(const Observation&) const = default;
};

struct RewardBreakdown {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double terminal_bonus = 0.0;
  double total = 0.0;
};

inline constexpr double kSuccessBonus = 100.0;

struct EpisodeConfig {
  int horizon = 160;
  double goal_distance_min_L = 8.0;
  double goal_distance_max_L = 28.0;
  double goal_bearing_min = 0.0;
  double goal_bearing_max = kTwoPi;
  double tolerance_L = 0.5;
  double initial_u_prime = 1.0;
  double initial_psi = 0.0;
  double dt_prime = 0.3;
  /// Overshoot is only checked once the ship is this far from the start.
  double overshoot_guard_L = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpisodeContext {
  Vec2 start;
  Vec2 destination;
  Vec2 v1;  ///< destination - start
  int step_count = 0;
};

enum class EpisodeStatus { running, success, overshoot, horizon };

std::string_view to_string(EpisodeStatus status);

/// Deterministic per-episode random stream.
using EpisodeRng = std::mt19937_64;

struct ResetResult {
  ShipState state;
  EpisodeContext context;
  Observation observation;
};

/// Ship at the origin heading +x at u' = 1; destination uniform in distance
/// and bearing over the configured ranges.
ResetResult reset(const EpisodeConfig& config, const ShipModel& model, EpisodeRng& rng);

/// Context for tracking an explicit start -> destination leg.
EpisodeContext make_context(Vec2 start, Vec2 destination);

/// Observation against the start -> destination segment of ctx.
Observation observe(const ShipState& state, const EpisodeContext& ctx, const ShipModel& model);

/// Shaped reward r1 + r2 + r3; the success bonus is added by env_step.
RewardBreakdown reward(const Observation& obs);

/// Precedence: success > overshoot > horizon > running.
EpisodeStatus is_terminal(const ShipState& state, const EpisodeContext& ctx,
                          const EpisodeConfig& config, const ShipModel& model);

struct StepResult {
  ShipState state;
  EpisodeContext context;
  Observation observation;
  RewardBreakdown reward;
  EpisodeStatus status = EpisodeStatus::running;
};

/// One control step at dt' then observation, reward and termination on the
/// post-step state.
StepResult env_step(const ShipState& state, const EpisodeContext& ctx, double delta_command,
                    const ShipModel& model, const WindField& wind, const EpisodeConfig& config);

}  // namespace helm
