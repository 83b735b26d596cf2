#include "helm/run_config.hpp"

#include <fstream>
#include <sstream>

#include "helm/dynamics.hpp"
#include "json_fields.hpp"
#include "model_fields.hpp"

namespace helm {

using detail::FieldReader;
using detail::json;

namespace {

Vec2 read_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError("'" + where + "' must be a [x, y] pair of numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

void read_wind(const json& j, WindField& w) {
  FieldReader r(j, "wind");
  double direction_deg = rad_to_deg(w.condition.direction_toward_rad);
  r.read("speed_mps", w.condition.speed_mps);
  r.read("direction_deg_toward", direction_deg);
  w.condition.direction_toward_rad = wrap_angle(deg_to_rad(direction_deg));
  if (const json* lm = r.child("load_model")) {
    FieldReader m(*lm, "wind.load_model");
    m.read("rho_air", w.load_model.rho_air);
    m.read("frontal_area_m2", w.load_model.frontal_area_m2);
    m.read("lateral_area_m2", w.load_model.lateral_area_m2);
    m.read("c_x", w.load_model.c_x);
    m.read("c_y", w.load_model.c_y);
    m.read("c_n", w.load_model.c_n);
    m.finish();
  }
  r.finish();
}

void read_controller(const json& j, ControllerConfig& c) {
  FieldReader r(j, "controller");
  if (const json* pd = r.child("pd")) {
    FieldReader p(*pd, "controller.pd");
    p.read("k_p", c.pd.k_p);
    p.read("k_d", c.pd.k_d);
    p.finish();
  }
  if (const json* il = r.child("ilos")) {
    FieldReader p(*il, "controller.ilos");
    p.read("lookahead_L", c.ilos_lookahead_L);
    p.read("integral_gain", c.ilos_integral_gain);
    p.finish();
  }
  r.finish();
}

void read_ppo(const json& j, PpoConfig& c) {
  FieldReader r(j, "ppo");
  r.read("lr0", c.lr0);
  r.read("decay_steps", c.decay_steps);
  r.read("decay_rate", c.decay_rate);
  r.read("gamma", c.gamma);
  r.read("lambda", c.lambda);
  r.read("clip", c.clip);
  r.read("entropy_coef", c.entropy_coef);
  r.read("epochs", c.epochs);
  r.read("episodes_per_iter", c.episodes_per_iter);
  r.read("iterations", c.iterations);
  r.read("value_coef", c.value_coef);
  r.read("minibatch_size", c.minibatch_size);
  r.read("actor_hidden", c.actor_hidden);
  r.read("critic_hidden", c.critic_hidden);
  r.read("actor_output_gain", c.actor_output_gain);
  r.read("initial_std", c.initial_std);
  r.read("selection_episodes", c.selection_episodes);
  r.read("max_consecutive_failures", c.max_consecutive_failures);
  r.finish();
}

void read_episode(const json& j, EpisodeConfig& e) {
  FieldReader r(j, "episode");
  r.read("horizon", e.horizon);
  r.read("goal_distance_min_L", e.goal_distance_min_L);
  r.read("goal_distance_max_L", e.goal_distance_max_L);
  r.read("goal_bearing_min", e.goal_bearing_min);
  r.read("goal_bearing_max", e.goal_bearing_max);
  r.read("tolerance_L", e.tolerance_L);
  r.read("initial_u_prime", e.initial_u_prime);
  r.read("initial_psi", e.initial_psi);
  r.read("dt_prime", e.dt_prime);
  r.read("overshoot_guard_L", e.overshoot_guard_L);
  r.finish();
}

void read_scenario(const json& j, ScenarioConfig& s) {
  FieldReader r(j, "scenario");
  r.read("name", s.name);
  r.read("step_cap", s.step_cap);
  r.read("dt_prime", s.dt_prime);
  if (const json* wps = r.child("waypoints_L")) {
    if (!wps->is_array()) throw ConfigError("'scenario.waypoints_L' must be an array of [x, y] pairs");
    s.waypoints_L.clear();
    for (const auto& p : *wps) s.waypoints_L.push_back(read_point(p, "scenario.waypoints_L"));
  }
  if (const json* st = r.child("start_L")) s.start_L = read_point(*st, "scenario.start_L");
  if (const json* psi = r.child("psi0_rad")) {
    if (!psi->is_number()) throw ConfigError("'scenario.psi0_rad' must be a number");
    s.psi0_rad = psi->get<double>();
  }
  r.finish();
}

void read_output(const json& j, std::string& dir) {
  FieldReader r(j, "output");
  r.read("dir", dir);
  r.finish();
}

}  // namespace

void RunConfig::validate() const {
  try {
    model.validate();
    wind.condition.validate();
    wind.load_model.validate();
    controller.pd.validate();
    ilos().validate();
    ppo.validate();
    episode.validate();
    if (scenario.step_cap < 0) throw InvalidParameter("scenario.step_cap must be non-negative");
    if (!(scenario.dt_prime > 0.0)) throw InvalidParameter("scenario.dt_prime must be positive");
    if (scenario.name.empty()) throw InvalidParameter("scenario.name must not be empty");
    if (output_dir.empty()) throw InvalidParameter("output.dir must not be empty");
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
}

double RunConfig::dt_s() const { return dimensional_dt(model, scenario.dt_prime); }

IlosParams RunConfig::ilos() const {
  return {controller.ilos_lookahead_L * model.principal.length_m, controller.ilos_integral_gain};
}

Scenario RunConfig::make_scenario() const {
  const double l = model.principal.length_m;
  Scenario s;
  if (scenario.waypoints_L.empty()) {
    try {
      s = build_scenario(scenario.name, model);
    } catch (const InvalidParameter& e) {
      throw ConfigError(e.what());
    }
  } else {
    s.name = scenario.name;
    s.u0_mps = model.principal.design_speed_mps;
    s.path.acceptance_radius_m = episode.tolerance_L * l;
    for (const Vec2& p : scenario.waypoints_L) s.path.points.push_back(p * l);
  }
  if (scenario.start_L) {
    s.start = *scenario.start_L * l;
    s.origin = s.start;
  }
  if (scenario.psi0_rad) s.psi0 = *scenario.psi0_rad;
  // the config wind replaces the scenario's only when it is not calm
  if (wind.condition.speed_mps > 0.0) s.wind.condition = wind.condition;
  s.wind.load_model = wind.load_model;
  s.step_cap = scenario.step_cap;
  try {
    s.path.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return s;
}

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  FieldReader top(doc, "");
  if (const json* j = top.child("ship")) detail::read_principal(*j, "ship", c.model.principal);
  if (const json* j = top.child("mmg")) detail::read_mmg(*j, "mmg", c.model.mmg);
  if (const json* j = top.child("actuator")) detail::read_actuator(*j, "actuator", c.model.actuator);
  if (const json* j = top.child("wind")) read_wind(*j, c.wind);
  if (const json* j = top.child("controller")) read_controller(*j, c.controller);
  if (const json* j = top.child("ppo")) read_ppo(*j, c.ppo);
  if (const json* j = top.child("episode")) read_episode(*j, c.episode);
  if (const json* j = top.child("scenario")) read_scenario(*j, c.scenario);
  if (const json* j = top.child("output")) read_output(*j, c.output_dir);
  top.read("seed", c.seed);
  top.finish();
  c.ppo.seed = c.seed;
  c.episode.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& c) {
  json model;
  detail::write_ship_sections(model, c.model);
  json doc;
  doc["ship"] = model["principal"];
  doc["mmg"] = model["mmg"];
  doc["actuator"] = model["actuator"];
  doc["wind"] = {{"speed_mps", c.wind.condition.speed_mps},
                 {"direction_deg_toward", rad_to_deg(c.wind.condition.direction_toward_rad)},
                 {"load_model",
                  {{"rho_air", c.wind.load_model.rho_air},
                   {"frontal_area_m2", c.wind.load_model.frontal_area_m2},
                   {"lateral_area_m2", c.wind.load_model.lateral_area_m2},
                   {"c_x", c.wind.load_model.c_x},
                   {"c_y", c.wind.load_model.c_y},
                   {"c_n", c.wind.load_model.c_n}}}};
  doc["controller"]["pd"] = {{"k_p", c.controller.pd.k_p}, {"k_d", c.controller.pd.k_d}};
  doc["controller"]["ilos"] = {{"lookahead_L", c.controller.ilos_lookahead_L},
                               {"integral_gain", c.controller.ilos_integral_gain}};
  const PpoConfig& p = c.ppo;
  doc["ppo"] = {{"lr0", p.lr0},
                {"decay_steps", p.decay_steps},
                {"decay_rate", p.decay_rate},
                {"gamma", p.gamma},
                {"lambda", p.lambda},
                {"clip", p.clip},
                {"entropy_coef", p.entropy_coef},
                {"epochs", p.epochs},
                {"episodes_per_iter", p.episodes_per_iter},
                {"iterations", p.iterations},
                {"value_coef", p.value_coef},
                {"minibatch_size", p.minibatch_size},
                {"actor_hidden", p.actor_hidden},
                {"critic_hidden", p.critic_hidden},
                {"actor_output_gain", p.actor_output_gain},
                {"initial_std", p.initial_std},
                {"selection_episodes", p.selection_episodes},
                {"max_consecutive_failures", p.max_consecutive_failures}};
  const EpisodeConfig& e = c.episode;
  doc["episode"] = {{"horizon", e.horizon},
                    {"goal_distance_min_L", e.goal_distance_min_L},
                    {"goal_distance_max_L", e.goal_distance_max_L},
                    {"goal_bearing_min", e.goal_bearing_min},
                    {"goal_bearing_max", e.goal_bearing_max},
                    {"tolerance_L", e.tolerance_L},
                    {"initial_u_prime", e.initial_u_prime},
                    {"initial_psi", e.initial_psi},
                    {"dt_prime", e.dt_prime},
                    {"overshoot_guard_L", e.overshoot_guard_L}};
  json sc = {{"name", c.scenario.name}, {"step_cap", c.scenario.step_cap}, {"dt_prime", c.scenario.dt_prime}};
  if (!c.scenario.waypoints_L.empty()) {
    json wps = json::array();
    for (const Vec2& v : c.scenario.waypoints_L) wps.push_back({v.x, v.y});
    sc["waypoints_L"] = wps;
  }
  if (c.scenario.start_L) sc["start_L"] = {c.scenario.start_L->x, c.scenario.start_L->y};
  if (c.scenario.psi0_rad) sc["psi0_rad"] = *c.scenario.psi0_rad;
  doc["scenario"] = sc;
  doc["output"] = {{"dir", c.output_dir}};
  doc["seed"] = c.seed;
  return doc.dump(2) + "\n";
}

}  // namespace helm
