#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "helm/control.hpp"
#include "helm/guidance.hpp"
#include "helm/ship.hpp"
#include "helm/trajectory.hpp"
#include "helm/wind.hpp"

namespace helm {

struct Scenario {
  std::string name;
  WaypointPath path;
  WindField wind;
  Vec2 start;
  double psi0 = 0.0;
  double u0_mps = 0.0;
  /// Start of the first path segment; usually the start position.
  Vec2 origin;
  int step_cap = 8000;
};

inline constexpr int kDefaultStepCap = 50 * 160;

/// Destinations (+-10L, +-10L) from the origin, heading +x.
std::vector<Scenario> quadrant_scenarios(const ShipModel& model);
/// 28L x 24L ellipse, 15 waypoints at uniform parametric angle, starting at
/// (14L, 0) heading -y.
Scenario ellipse_scenario(const ShipModel& model);
/// Two circles of the given radius tangent at the origin, lower circle
/// first, n waypoints in total, starting at the origin heading +x.
Scenario eight_scenario(const ShipModel& model, double radius_L, int waypoints);
/// Square traversed counter-clockwise from the origin heading +x.
Scenario square_scenario(const ShipModel& model, double side_L);
/// Straight path along +x; the ship starts offset_L to port of it.
Scenario straight_scenario(const ShipModel& model, double offset_L);
/// 30L leg along +x under the given wind.
Scenario wind_scenario(const ShipModel& model, std::string name, WindCondition wind);

/// Calm water with the KCS wind load model attached.
WindField calm_wind();

/// Names accepted by build_scenario, in listing order.
std::vector<std::string> builtin_scenario_names();
/// Throws InvalidParameter for an unknown name.
Scenario build_scenario(std::string_view name, const ShipModel& model);

struct RunResult {
  Trajectory trajectory;
  RunMetrics metrics;
};

/// Closed loop: controller -> step -> advance_waypoint until the final
/// waypoint is captured or the step cap is hit. A numerical blowup ends the
/// run with the partial trajectory kept.
RunResult run_scenario(const Scenario& scenario, const Controller& controller, const ShipModel& model,
                       double dt);

/// sqrt(mean(d_c^2)) in ship lengths; throws InvalidParameter when empty.
double rms_cross_track(std::span<const double> d_c_L);
double rms_cross_track(const Trajectory& traj);

/// RMS of the finite-difference rudder rate; needs at least 2 samples.
double rudder_effort(std::span<const double> delta_rad, double dt);
double rudder_effort(const Trajectory& traj);

/// (rms_b - rms_a) / rms_b * 100.
double reduction_pct(double rms_a, double rms_b);

ComparisonReport make_report(const std::string& scenario, const RunMetrics& a, const RunMetrics& b);

struct Comparison {
  RunResult a;
  RunResult b;
  ComparisonReport report;
};

Comparison compare(const Scenario& scenario, const Controller& a, const Controller& b,
                   const ShipModel& model, double dt);

}  // namespace helm
