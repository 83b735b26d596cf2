#include "helm/wind.hpp"

#include <cmath>

#include "helm/errors.hpp"

namespace helm {

void WindCondition::validate() const {
  if (!std::isfinite(speed_mps) || speed_mps < 0.0) {
    throw InvalidParameter("wind speed must be finite and non-negative");
  }
  if (!(direction_toward_rad > -kPi && direction_toward_rad <= kPi)) {
    throw InvalidParameter("wind direction must lie in (-pi, pi]");
  }
}

void WindLoadModel::validate() const {
  if (!(rho_air > 0.0) || !(frontal_area_m2 > 0.0) || !(lateral_area_m2 > 0.0)) {
    throw InvalidParameter("wind load model: rho_air and areas must be positive");
  }
  if (!std::isfinite(c_x) || !std::isfinite(c_y) || !std::isfinite(c_n) ||
      !std::isfinite(rho_air) || !std::isfinite(frontal_area_m2) ||
      !std::isfinite(lateral_area_m2)) {
    throw InvalidParameter("wind load model: non-finite value");
  }
}

WindLoadModel kcs_wind_load_model() {
  WindLoadModel m;
  m.rho_air = 1.225;
  m.frontal_area_m2 = 300.0;
  m.lateral_area_m2 = 1500.0;
  m.c_x = 0.9;
  m.c_y = 0.95;
  m.c_n = 0.2;
  return m;
}

RelativeWind relative_wind(const ShipState& state, const WindCondition& wind) {
  const Vec2 air{wind.speed_mps * std::cos(wind.direction_toward_rad),
                 wind.speed_mps * std::sin(wind.direction_toward_rad)};
  const Vec2 rel_earth = air - state.ground_velocity();
  const Vec2 rel_body = rotate(rel_earth, -state.psi);
  const double speed = rel_body.norm();
  if (speed == 0.0) return {0.0, 0.0};
  return {speed, wrap_angle(rel_body.azimuth())};
}

Loads wind_loads(const ShipState& state, const WindCondition& wind,
                 const WindLoadModel& model, double length_m) {
  const RelativeWind rel = relative_wind(state, wind);
  const double q = 0.5 * model.rho_air * rel.speed_mps * rel.speed_mps;
  const double g = rel.angle_rad;
  return {q * model.frontal_area_m2 * model.c_x * std::cos(g),
          q * model.lateral_area_m2 * model.c_y * std::sin(g),
          q * model.lateral_area_m2 * length_m * model.c_n * std::sin(2.0 * g)};
}

}  // namespace helm
