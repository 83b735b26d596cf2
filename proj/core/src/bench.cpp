#include "helm/bench.hpp"

#include <algorithm>
#include <cmath>

#include "helm/dynamics.hpp"
#include "helm/errors.hpp"
#include "helm/mdp.hpp"

namespace helm {

namespace {

Scenario base_scenario(const ShipModel& model, std::string name) {
  Scenario s;
  s.name = std::move(name);
  s.path.acceptance_radius_m = 0.5 * model.principal.length_m;
  s.wind = calm_wind();
  s.u0_mps = model.principal.design_speed_mps;
  s.step_cap = kDefaultStepCap;
  return s;
}

}  // namespace

WindField calm_wind() { return {{0.0, 0.0}, kcs_wind_load_model()}; }

std::vector<Scenario> quadrant_scenarios(const ShipModel& model) {
  const double l = model.principal.length_m;
  const struct {
    const char* name;
    double sx, sy;
  } quads[] = {{"quadrant_pp", 1, 1}, {"quadrant_mp", -1, 1}, {"quadrant_pm", 1, -1}, {"quadrant_mm", -1, -1}};
  std::vector<Scenario> out;
  for (const auto& q : quads) {
    Scenario s = base_scenario(model, q.name);
    s.path.points = {{q.sx * 10.0 * l, q.sy * 10.0 * l}};
    out.push_back(std::move(s));
  }
  return out;
}

Scenario ellipse_scenario(const ShipModel& model) {
  const double l = model.principal.length_m;
  Scenario s = base_scenario(model, "ellipse");
  for (int k = 0; k < 15; ++k) {
    const double theta = -kTwoPi * k / 14.0;
    s.path.points.push_back({14.0 * l * std::cos(theta), 12.0 * l * std::sin(theta)});
  }
  // the closing point must equal the start exactly
  s.path.points.back() = s.path.points.front();
  s.start = s.path.points.front();
  s.origin = s.start;
  s.psi0 = -kPi / 2.0;
  return s;
}

Scenario eight_scenario(const ShipModel& model, double radius_L, int waypoints) {
  if (!(radius_L > 0.0) || waypoints < 4) {
    throw InvalidParameter("eight needs a positive radius and at least 4 waypoints");
  }
  const double l = model.principal.length_m;
  const double r = radius_L * l;
  const int n_lower = (waypoints + 1) / 2;
  const int n_upper = waypoints - n_lower;
  Scenario s = base_scenario(model, "eight_" + std::to_string(static_cast<int>(std::lround(radius_L))) + "L_" +
                                        std::to_string(waypoints));
  for (int k = 0; k < n_lower; ++k) {
    const double phi = kPi / 2.0 - kTwoPi * (k + 1) / n_lower;
    s.path.points.push_back({r * std::cos(phi), -r + r * std::sin(phi)});
  }
  s.path.points.back() = {0.0, 0.0};
  for (int k = 0; k < n_upper; ++k) {
    const double phi = -kPi / 2.0 + kTwoPi * (k + 1) / n_upper;
    s.path.points.push_back({r * std::cos(phi), r + r * std::sin(phi)});
  }
  s.path.points.back() = {0.0, 0.0};
  return s;
}

Scenario square_scenario(const ShipModel& model, double side_L) {
  if (!(side_L > 0.0)) throw InvalidParameter("square side must be positive");
  const double a = side_L * model.principal.length_m;
  Scenario s = base_scenario(model, "square_" + std::to_string(static_cast<int>(std::lround(side_L))) + "L");
  s.path.points = {{0.0, 0.0}, {a, 0.0}, {a, a}, {0.0, a}, {0.0, 0.0}};
  return s;
}

Scenario straight_scenario(const ShipModel& model, double offset_L) {
  const double l = model.principal.length_m;
  Scenario s = base_scenario(model, offset_L == 0.0 ? std::string("straight")
                                                    : "straight_offset_" + std::to_string(static_cast<int>(std::lround(offset_L))) + "L");
  s.path.points = {{60.0 * l, 0.0}};
  s.start = {0.0, offset_L * l};
  s.origin = {0.0, 0.0};
  return s;
}

Scenario wind_scenario(const ShipModel& model, std::string name, WindCondition wind) {
  wind.validate();
  const double l = model.principal.length_m;
  Scenario s = base_scenario(model, std::move(name));
  s.path.points = {{15.0 * l, 0.0}, {30.0 * l, 0.0}};
  s.wind.condition = wind;
  return s;
}

std::vector<std::string> builtin_scenario_names() {
  return {"quadrant_pp", "quadrant_mp", "quadrant_pm",  "quadrant_mm",       "ellipse",      "eight_9L_23",
          "eight_6L_20", "square_10L",  "straight",     "straight_offset_2L", "wind_beam_6U", "wind_head_3U"};
}

Scenario build_scenario(std::string_view name, const ShipModel& model) {
  const double u = model.principal.design_speed_mps;
  for (auto& q : quadrant_scenarios(model)) {
    if (q.name == name) return q;
  }
  if (name == "ellipse") return ellipse_scenario(model);
  if (name == "eight_9L_23") return eight_scenario(model, 9.0, 23);
  if (name == "eight_6L_20") return eight_scenario(model, 6.0, 20);
  if (name == "square_10L") return square_scenario(model, 10.0);
  if (name == "straight") return straight_scenario(model, 0.0);
  if (name == "straight_offset_2L") return straight_scenario(model, 2.0);
  if (name == "wind_beam_6U") return wind_scenario(model, "wind_beam_6U", {6.0 * u, -kPi / 2.0});
  if (name == "wind_head_3U") return wind_scenario(model, "wind_head_3U", {3.0 * u, kPi});
  throw InvalidParameter("unknown scenario '" + std::string(name) + "'");
}

double rms_cross_track(std::span<const double> d_c_L) {
  if (d_c_L.empty()) throw InvalidParameter("rms_cross_track needs at least one sample");
  double s = 0.0;
  for (double d : d_c_L) s += d * d;
  return std::sqrt(s / static_cast<double>(d_c_L.size()));
}

double rms_cross_track(const Trajectory& traj) {
  std::vector<double> d;
  d.reserve(traj.size());
  for (const auto& r : traj) d.push_back(r.d_c_L);
  return rms_cross_track(d);
}

double rudder_effort(std::span<const double> delta_rad, double dt) {
  if (delta_rad.size() < 2) throw InvalidParameter("rudder_effort needs at least two samples");
  if (!(dt > 0.0)) throw InvalidParameter("rudder_effort needs a positive dt");
  double s = 0.0;
  for (std::size_t i = 1; i < delta_rad.size(); ++i) {
    const double rate = (delta_rad[i] - delta_rad[i - 1]) / dt;
    s += rate * rate;
  }
  return std::sqrt(s / static_cast<double>(delta_rad.size() - 1));
}

double rudder_effort(const Trajectory& traj) {
  if (traj.size() < 2) throw InvalidParameter("rudder_effort needs at least two samples");
  double s = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double dt = traj[i].t_s - traj[i - 1].t_s;
    if (!(dt > 0.0)) throw InvalidParameter("trajectory time stamps must increase");
    const double rate = (traj[i].delta_rad - traj[i - 1].delta_rad) / dt;
    s += rate * rate;
  }
  return std::sqrt(s / static_cast<double>(traj.size() - 1));
}

double reduction_pct(double rms_a, double rms_b) {
  if (!(rms_b > 0.0)) throw InvalidParameter("reduction_pct needs a positive reference RMS");
  return (rms_b - rms_a) / rms_b * 100.0;
}

RunResult run_scenario(const Scenario& scenario, const Controller& controller, const ShipModel& model,
                       double dt) {
  scenario.path.validate();
  if (!(dt > 0.0)) throw InvalidParameter("run_scenario needs a positive dt");
  if (scenario.step_cap < 0) throw InvalidParameter("step cap must be non-negative");
  ShipState state;
  state.x = scenario.start.x;
  state.y = scenario.start.y;
  state.psi = wrap_angle(scenario.psi0);
  state.u = scenario.u0_mps;
  state.n_p = model.actuator.propeller_rps;

  RunResult res;
  RunMetrics& m = res.metrics;
  m.scenario = scenario.name;
  m.controller = std::string(controller.name());
  m.dt_s = dt;
  m.waypoints = static_cast<int>(scenario.path.size());

  GuidanceState g;
  g.origin = scenario.origin;
  WaypointAdvance adv = advance_waypoint(state.position(), scenario.path, g);
  for (std::size_t i = 0; i < adv.state.active_index + (adv.reached_final ? 1 : 0); ++i) {
    m.capture_times_s.push_back(0.0);
  }
  g = adv.state;
  bool done = adv.reached_final;
  double t = 0.0;

  for (int k = 0; k < scenario.step_cap && !done; ++k) {
    const ControlOutput cmd = controller.command({state, scenario.path, g, dt});
    try {
      state = step(state, cmd.delta_c, scenario.wind, model, dt);
    } catch (const NumericalBlowup& e) {
      m.status = RunStatus::blowup;
      m.partial = true;
      m.error = e.what();
      break;
    }
    t = static_cast<double>(k + 1) * dt;
    g = cmd.guidance;

    const Segment seg = active_segment(scenario.path, g);
    const Observation obs = observe(state, make_context(seg.start, seg.end), model);
    const RewardBreakdown rw = reward(obs);
    TrajectoryRow row;
    row.t_s = t;
    row.x_m = state.x;
    row.y_m = state.y;
    row.psi_rad = state.psi;
    row.u_mps = state.u;
    row.v_mps = state.v;
    row.r_radps = state.r;
    row.delta_rad = state.delta;
    row.delta_c_rad = cmd.delta_c;
    row.d_c_L = obs.d_c;
    row.chi_e_rad = obs.chi_e;
    row.d_wp_L = obs.d_wp;
    row.active_wp = static_cast<int>(g.active_index);
    row.r1 = rw.r1;
    row.r2 = rw.r2;
    row.r3 = rw.r3;
    row.reward_total = rw.total;
    res.trajectory.push_back(row);

    const std::size_t before = g.active_index;
    adv = advance_waypoint(state.position(), scenario.path, g);
    const std::size_t captured = adv.state.active_index - before + (adv.reached_final ? 1 : 0);
    for (std::size_t i = 0; i < captured; ++i) m.capture_times_s.push_back(t);
    g = adv.state;
    done = adv.reached_final;
  }

  m.steps = static_cast<int>(res.trajectory.size());
  if (m.status != RunStatus::blowup) m.status = done ? RunStatus::success : RunStatus::step_cap;
  m.success = m.status == RunStatus::success;
  if (!res.trajectory.empty()) {
    m.rms_cross_track_L = rms_cross_track(res.trajectory);
    const double first_capture = m.capture_times_s.empty() ? t : m.capture_times_s.front();
    std::vector<double> post;
    double sq = 0.0;
    for (const auto& r : res.trajectory) {
      if (r.t_s > first_capture) post.push_back(r.d_c_L);
      sq += r.delta_rad * r.delta_rad;
    }
    m.rms_cross_track_post_L = post.empty() ? m.rms_cross_track_L : rms_cross_track(post);
    m.rms_rudder_rad = std::sqrt(sq / static_cast<double>(res.trajectory.size()));
  }
  if (res.trajectory.size() >= 2) m.rudder_effort_radps = rudder_effort(res.trajectory);
  return res;
}

ComparisonReport make_report(const std::string& scenario, const RunMetrics& a, const RunMetrics& b) {
  ComparisonReport r;
  r.scenario = scenario;
  r.a = a;
  r.b = b;
  r.valid = a.success && b.success && b.rms_cross_track_L > 0.0 && b.rudder_effort_radps > 0.0;
  if (b.rms_cross_track_L > 0.0) r.rms_reduction_pct = reduction_pct(a.rms_cross_track_L, b.rms_cross_track_L);
  if (b.rms_cross_track_post_L > 0.0) {
    r.rms_post_reduction_pct = reduction_pct(a.rms_cross_track_post_L, b.rms_cross_track_post_L);
  }
  if (b.rudder_effort_radps > 0.0) r.effort_ratio = a.rudder_effort_radps / b.rudder_effort_radps;
  return r;
}

Comparison compare(const Scenario& scenario, const Controller& a, const Controller& b, const ShipModel& model,
                   double dt) {
  Comparison c;
  c.a = run_scenario(scenario, a, model, dt);
  c.b = run_scenario(scenario, b, model, dt);
  c.report = make_report(scenario.name, c.a.metrics, c.b.metrics);
  return c;
}

}  // namespace helm
