#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace helm {

/// One logged control step (post-step state).
struct TrajectoryRow {
  double t_s = 0.0;
  double x_m = 0.0;
  double y_m = 0.0;
  double psi_rad = 0.0;
  double u_mps = 0.0;
  double v_mps = 0.0;
  double r_radps = 0.0;
  double delta_rad = 0.0;
  double delta_c_rad = 0.0;
  double d_c_L = 0.0;
  double chi_e_rad = 0.0;
  double d_wp_L = 0.0;
  int active_wp = 0;
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double reward_total = 0.0;

  bool operator==(const TrajectoryRow&) const = default;
};

inline constexpr std::array<std::string_view, 17> kTrajectoryColumns{
    "t_s",     "x_m",     "y_m",       "psi_rad", "u_mps",     "v_mps", "r_radps", "delta_rad", "delta_c_rad",
    "d_c_L",   "chi_e_rad", "d_wp_L",  "active_wp", "r1",      "r2",    "r3",      "reward_total"};

using Trajectory = std::vector<TrajectoryRow>;

enum class RunStatus { success, step_cap, blowup };

std::string_view to_string(RunStatus status);

struct RunMetrics {
  std::string scenario;
  std::string controller;
  RunStatus status = RunStatus::step_cap;
  bool success = false;
  bool partial = false;  ///< run ended early on a numerical failure
  int steps = 0;
  double dt_s = 0.0;
  double rms_cross_track_L = 0.0;
  /// RMS over the steps after the first waypoint capture.
  double rms_cross_track_post_L = 0.0;
  double rudder_effort_radps = 0.0;  ///< RMS rudder rate
  double rms_rudder_rad = 0.0;
  int waypoints = 0;
  std::vector<double> capture_times_s;  ///< one per captured waypoint, in order
  std::string error;                    ///< diagnostic for failed runs
};

struct ComparisonReport {
  std::string scenario;
  RunMetrics a;
  RunMetrics b;
  bool valid = false;
  /// (rms_b - rms_a) / rms_b * 100
  double rms_reduction_pct = 0.0;
  double rms_post_reduction_pct = 0.0;
  /// effort_a / effort_b
  double effort_ratio = 0.0;
};

}  // namespace helm
