#pragma once

#include "helm/angles.hpp"

namespace helm {

/// Principal particulars. Dimensional, SI units.
struct ShipPrincipalParams {
  double length_m = 0.0;           ///< length between perpendiculars L
  double beam_m = 0.0;             ///< B
  double draft_m = 0.0;            ///< d
  double displacement_m3 = 0.0;    ///< volume displacement
  double x_g_m = 0.0;              ///< longitudinal CG from midships, + forward
  double design_speed_mps = 0.0;   ///< U_design, also the prime-II reference speed
  double rho_water = 0.0;          ///< kg/m^3

  void validate() const;
};

/// Hull, propeller and rudder coefficients of the MMG standard method.
/// All primed quantities use prime-II normalisation: mass 1/2 rho L^2 d,
/// inertia 1/2 rho L^4 d, force 1/2 rho L d U^2, moment 1/2 rho L^2 d U^2.
struct MmgCoefficients {
  // masses
  double m = 0.0;
  double m_x = 0.0;
  double m_y = 0.0;
  double j_z = 0.0;
  double i_zz = 0.0;

  // hull
  double r_0 = 0.0;
  double x_vv = 0.0, x_vr = 0.0, x_rr = 0.0, x_vvvv = 0.0;
  double y_v = 0.0, y_r = 0.0, y_vvv = 0.0, y_vvr = 0.0, y_vrr = 0.0, y_rrr = 0.0;
  double n_v = 0.0, n_r = 0.0, n_vvv = 0.0, n_vvr = 0.0, n_vrr = 0.0, n_rrr = 0.0;

  // propeller
  double d_p = 0.0;     ///< propeller diameter (m)
  double t_p = 0.0;     ///< thrust deduction
  double w_p0 = 0.0;    ///< wake fraction in straight running
  double x_p = 0.0;     ///< propeller position x'_P
  double k_0 = 0.0, k_1 = 0.0, k_2 = 0.0;
  double j_max = 0.0;   ///< upper end of the advance-ratio operating range

  // rudder
  double a_r = 0.0;     ///< rudder area (m^2)
  double aspect_ratio = 0.0;
  double f_alpha = 0.0;
  double epsilon = 0.0;
  double kappa = 0.0;
  double t_r = 0.0;
  double a_h = 0.0;
  double x_h = 0.0;     ///< x'_H
  double x_r = 0.0;     ///< x'_R
  double gamma_r = 0.0;
  double l_r = 0.0;     ///< l'_R

  /// Open-water thrust coefficient K_T(J).
  double thrust_coefficient(double advance_ratio) const {
    return k_0 + k_1 * advance_ratio + k_2 * advance_ratio * advance_ratio;
  }

  void validate() const;
};

struct ActuatorParams {
  double delta_max_rad = deg_to_rad(35.0);
  double delta_rate_max_radps = deg_to_rad(5.0);
  double propeller_rps = 0.0;  ///< held constant for every run

  void validate() const;
};

/// Complete parameter record for one ship.
struct ShipModel {
  ShipPrincipalParams principal;
  MmgCoefficients mmg;
  ActuatorParams actuator;

  void validate() const;
};

/// Compiled-in KCS defaults; identical to data/kcs.json.
ShipModel kcs_model();

/// Pose in the earth frame, velocities in the body frame at midships.
/// psi is measured counter-clockwise from earth +x.
struct ShipState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double u = 0.0;
  double v = 0.0;
  double r = 0.0;
  double delta = 0.0;    ///< actual rudder angle (rad)
  double n_p = 0.0;      ///< propeller rate (rev/s)

  Vec2 position() const { return {x, y}; }
  /// Velocity over ground in the earth frame.
  Vec2 ground_velocity() const { return rotate({u, v}, psi); }
  double speed() const { return std::hypot(u, v); }
  bool is_finite() const;

  bool operator==(const ShipState&) const = default;
};

/// Surge force, sway force and yaw moment. The unit system (SI or prime-II)
/// is given by the producing function.
struct Loads {
  double x = 0.0;
  double y = 0.0;
  double n = 0.0;

  Loads operator+(const Loads& o) const { return {x + o.x, y + o.y, n + o.n}; }
  Loads operator*(double s) const { return {x * s, y * s, n * s}; }
  bool operator==(const Loads&) const = default;
};

}  // namespace helm
