#include "helm/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "helm/errors.hpp"
#include "helm/format.hpp"

namespace helm {

void WaypointPath::validate() const {
  if (points.empty()) throw InvalidParameter("waypoint path needs at least one point");
  if (!(acceptance_radius_m > 0.0)) throw InvalidParameter("acceptance radius must be positive");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] == points[i - 1]) {
      throw InvalidParameter("consecutive waypoints must be distinct (index " + std::to_string(i) + ")");
    }
  }
  for (const Vec2& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidParameter("non-finite waypoint");
  }
}

void IlosParams::validate() const {
  if (!(lookahead_m > 0.0)) throw InvalidParameter("ILOS lookahead must be positive");
  if (!(integral_gain >= 0.0) || !std::isfinite(integral_gain)) {
    throw InvalidParameter("ILOS integral gain must be finite and non-negative");
  }
}

IlosParams default_ilos(double length_m) { return {2.0 * length_m, 0.05}; }

double cross_track_error(Vec2 pos, Vec2 seg_start, Vec2 seg_end) {
  const Vec2 dir = seg_end - seg_start;
  const double len = dir.norm();
  if (!(len > 0.0)) throw InvalidParameter("cross-track error on a degenerate segment");
  // Port is +cross; starboard-positive is its negation.
  return -dir.cross(pos - seg_start) / len;
}

double course_over_ground(const ShipState& state) {
  const Vec2 vel = state.ground_velocity();
  if (vel.x == 0.0 && vel.y == 0.0) return wrap_angle(state.psi);
  return vel.azimuth();
}

double course_error(const ShipState& state, Vec2 target) {
  const Vec2 to_target = target - state.position();
  return wrap_angle(to_target.azimuth() - course_over_ground(state));
}

double distance_to_waypoint(Vec2 pos, Vec2 target) { return (target - pos).norm(); }

Segment active_segment(const WaypointPath& path, const GuidanceState& gstate) {
  const std::size_t i = std::min(gstate.active_index, path.size() - 1);
  return {i == 0 ? gstate.origin : path.points[i - 1], path.points[i]};
}

HeadingReference ilos_desired_heading(const ShipState& state, const WaypointPath& path,
                                      const GuidanceState& gstate, const IlosParams& params,
                                      double dt) {
  Segment seg = active_segment(path, gstate);
  if (seg.start == seg.end) {
    // Ship started on the first waypoint; steer along the path direction instead.
    seg.end = seg.start + Vec2{std::cos(state.psi), std::sin(state.psi)};
  }
  const double azimuth = (seg.end - seg.start).azimuth();
  const double d_c = cross_track_error(state.position(), seg.start, seg.end);
  const double delta = params.lookahead_m;
  const double kappa = params.integral_gain;

  HeadingReference out;
  out.state = gstate;
  const double corrected = d_c + kappa * gstate.y_int;
  out.psi_d = wrap_angle(azimuth + std::atan(corrected / delta));

  const double y_rate = state.speed() * delta * d_c / (delta * delta + corrected * corrected);
  double y_int = gstate.y_int + dt * y_rate;
  if (kappa > 0.0) {
    const double limit = delta / kappa;
    y_int = std::clamp(y_int, -limit, limit);
  }
  out.state.y_int = y_int;
  return out;
}

WaypointAdvance advance_waypoint(Vec2 pos, const WaypointPath& path, const GuidanceState& gstate) {
  WaypointAdvance out{gstate, false};
  while (out.state.active_index < path.size() &&
         distance_to_waypoint(pos, path.points[out.state.active_index]) < path.acceptance_radius_m) {
    ++out.state.active_index;
  }
  if (out.state.active_index >= path.size()) {
    out.state.active_index = path.size() - 1;
    out.reached_final = true;
  }
  return out;
}

void write_path_csv(std::ostream& out, const WaypointPath& path) {
  out << "x_m,y_m\n";
  for (const Vec2& p : path.points) out << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

WaypointPath read_path_csv(std::istream& in, double acceptance_radius_m) {
  WaypointPath path;
  path.acceptance_radius_m = acceptance_radius_m;
  std::string line;
  if (!std::getline(in, line)) throw InvalidParameter("path CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x_m,y_m") throw InvalidParameter("path CSV header must be 'x_m,y_m'");
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string xs, ys;
    if (!std::getline(fields, xs, ',') || !std::getline(fields, ys)) {
      throw InvalidParameter("path CSV row " + std::to_string(row) + " needs two columns");
    }
    try {
      path.points.push_back({std::stod(xs), std::stod(ys)});
    } catch (const std::exception&) {
      throw InvalidParameter("path CSV row " + std::to_string(row) + " is not numeric");
    }
  }
  path.validate();
  return path;
}

}  // namespace helm
