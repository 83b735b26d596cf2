#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "helm/angles.hpp"
#include "helm/ship.hpp"

namespace helm {

struct WaypointPath {
  std::vector<Vec2> points;
  double acceptance_radius_m = 0.0;

  std::size_t size() const { return points.size(); }
  /// Throws InvalidParameter when empty, with repeated consecutive points or
  /// a non-positive acceptance radius.
  void validate() const;
};

struct GuidanceState {
  std::size_t active_index = 0;
  double y_int = 0.0;     ///< ILOS integral state (m)
  Vec2 origin;            ///< start of the first segment (run start position)
};

struct IlosParams {
  double lookahead_m = 0.0;     ///< Delta
  double integral_gain = 0.05;  ///< kappa

  void validate() const;
};

/// ILOS defaults for a ship of the given length: Delta = 2L, kappa = 0.05.
IlosParams default_ilos(double length_m);

/// Signed distance from pos to the infinite line through the segment,
/// positive when pos lies to starboard (right) of the segment direction.
double cross_track_error(Vec2 pos, Vec2 seg_start, Vec2 seg_end);

/// Direction of the velocity over ground; falls back to heading when the
/// ship is not moving.
double course_over_ground(const ShipState& state);

/// wrap(bearing(pos -> target) - course over ground), in (-pi, pi].
double course_error(const ShipState& state, Vec2 target);

double distance_to_waypoint(Vec2 pos, Vec2 target);

struct Segment {
  Vec2 start;
  Vec2 end;
};

/// Segment ending at the active waypoint; the first one starts at gstate.origin.
Segment active_segment(const WaypointPath& path, const GuidanceState& gstate);

struct HeadingReference {
  double psi_d = 0.0;
  GuidanceState state;
};

/// Integral line-of-sight law
///   psi_d = azimuth + atan((d_c + kappa y_int) / Delta)
///   y_int' = U Delta d_c / (Delta^2 + (d_c + kappa y_int)^2)
/// with d_c starboard-positive and |kappa y_int| clamped to Delta.
HeadingReference ilos_desired_heading(const ShipState& state, const WaypointPath& path,
                                      const GuidanceState& gstate, const IlosParams& params,
                                      double dt);

struct WaypointAdvance {
  GuidanceState state;
  bool reached_final = false;
};

/// Captures every waypoint strictly inside the acceptance radius, in order.
WaypointAdvance advance_waypoint(Vec2 pos, const WaypointPath& path, const GuidanceState& gstate);

/// Path CSV: header "x_m,y_m", one waypoint per row.
void write_path_csv(std::ostream& out, const WaypointPath& path);
WaypointPath read_path_csv(std::istream& in, double acceptance_radius_m);

}  // namespace helm
