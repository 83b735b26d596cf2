#pragma once

#include "helm/ship.hpp"

namespace helm {

/// Constant, uniform wind. The direction is where the air blows TOWARD,
/// measured counter-clockwise from earth +x.
struct WindCondition {
  double speed_mps = 0.0;
  double direction_toward_rad = 0.0;

  void validate() const;
};

/// Single-harmonic wind load curves
///   C_X = c_x cos(gamma), C_Y = c_y sin(gamma), C_N = c_n sin(2 gamma)
/// with gamma the body-frame direction the relative wind blows toward.
struct WindLoadModel {
  double rho_air = 1.225;
  double frontal_area_m2 = 0.0;
  double lateral_area_m2 = 0.0;
  double c_x = 0.9;
  double c_y = 0.95;
  double c_n = 0.2;

  void validate() const;
};

/// Shipped wind-load defaults for the KCS.
WindLoadModel kcs_wind_load_model();

struct WindField {
  WindCondition condition;
  WindLoadModel load_model;
};

struct RelativeWind {
  double speed_mps = 0.0;
  /// Body-frame direction of the relative air velocity, (-pi, pi].
  /// 0 is a tailwind, pi is a headwind.
  double angle_rad = 0.0;
};

RelativeWind relative_wind(const ShipState& state, const WindCondition& wind);

/// Wind force and moment at midships (N, N, N m).
Loads wind_loads(const ShipState& state, const WindCondition& wind,
                 const WindLoadModel& model, double length_m);

}  // namespace helm
