#include "helm/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "helm/errors.hpp"

namespace helm {

namespace {

bool all_finite(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

// Below this speed the prime-II ratios v/U and rL/U are meaningless; hull
// loads scale with U^2 and are taken as zero.
constexpr double kMinSpeed = 1e-9;

struct MassMatrix {
  double m = 0.0;
  double m_x = 0.0;
  double m_y = 0.0;
  double x_g = 0.0;
  // [a11 a12; a12 a22] multiplying (v_dot, r_dot)
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;
  double det = 0.0;
};

MassMatrix mass_matrix(const ShipModel& model) {
  const auto& p = model.principal;
  const auto& c = model.mmg;
  const double mass_scale = 0.5 * p.rho_water * p.length_m * p.length_m * p.draft_m;
  const double inertia_scale = mass_scale * p.length_m * p.length_m;
  MassMatrix mm;
  mm.m = c.m * mass_scale;
  mm.m_x = c.m_x * mass_scale;
  mm.m_y = c.m_y * mass_scale;
  mm.x_g = p.x_g_m;
  mm.a11 = mm.m + mm.m_y;
  mm.a12 = mm.x_g * mm.m;
  mm.a22 = c.i_zz * inertia_scale + mm.x_g * mm.x_g * mm.m + c.j_z * inertia_scale;
  mm.det = mm.a11 * mm.a22 - mm.a12 * mm.a12;
  return mm;
}

double drift_angle(double u, double v) { return std::atan2(-v, std::abs(u)); }

}  // namespace

void ShipPrincipalParams::validate() const {
  if (!all_finite({length_m, beam_m, draft_m, displacement_m3, x_g_m, design_speed_mps, rho_water})) {
    throw InvalidParameter("principal particulars must be finite");
  }
  if (!(length_m > 0.0 && beam_m > 0.0 && draft_m > 0.0 && displacement_m3 > 0.0 &&
        design_speed_mps > 0.0 && rho_water > 0.0)) {
    throw InvalidParameter("principal particulars L, B, d, displacement, U_design, rho must be positive");
  }
  if (!(std::abs(x_g_m) < 0.5 * length_m)) {
    throw InvalidParameter("|x_G| must be less than L/2");
  }
}

void MmgCoefficients::validate() const {
  if (!all_finite({m, m_x, m_y, j_z, i_zz, r_0, x_vv, x_vr, x_rr, x_vvvv, y_v, y_r, y_vvv, y_vvr,
                   y_vrr, y_rrr, n_v, n_r, n_vvv, n_vvr, n_vrr, n_rrr, d_p, t_p, w_p0, x_p, k_0,
                   k_1, k_2, j_max, a_r, aspect_ratio, f_alpha, epsilon, kappa, t_r, a_h, x_h, x_r,
                   gamma_r, l_r})) {
    throw InvalidParameter("MMG coefficients must be finite");
  }
  if (!(d_p > 0.0 && a_r > 0.0 && aspect_ratio > 0.0 && f_alpha > 0.0)) {
    throw InvalidParameter("D_p, A_R, aspect ratio and f_alpha must be positive");
  }
  for (double frac : {t_p, w_p0, t_r}) {
    if (!(frac >= 0.0 && frac < 1.0)) {
      throw InvalidParameter("t_P, w_P0 and t_R must lie in [0, 1)");
    }
  }
  if (!(j_max > 0.0)) throw InvalidParameter("J operating range must be positive");
  // K_T is quadratic: positivity on [0, j_max] is decided by the endpoints
  // and, when interior, the vertex.
  std::array<double, 3> probes{0.0, j_max, j_max};
  if (k_2 != 0.0) {
    const double vertex = -k_1 / (2.0 * k_2);
    if (vertex > 0.0 && vertex < j_max) probes[2] = vertex;
  }
  for (double j : probes) {
    if (!(thrust_coefficient(j) > 0.0)) {
      throw InvalidParameter("K_T(J) must be positive on [0, J_max]");
    }
  }
}

void ActuatorParams::validate() const {
  if (!(delta_max_rad > 0.0 && delta_max_rad < 0.5 * kPi)) {
    throw InvalidParameter("delta_max must lie in (0, pi/2)");
  }
  if (!(delta_rate_max_radps > 0.0) || !std::isfinite(delta_rate_max_radps)) {
    throw InvalidParameter("rudder rate limit must be positive");
  }
  if (!(propeller_rps >= 0.0) || !std::isfinite(propeller_rps)) {
    throw InvalidParameter("propeller rate must be finite and non-negative");
  }
}

void ShipModel::validate() const {
  principal.validate();
  mmg.validate();
  actuator.validate();
  const MassMatrix mm = mass_matrix(*this);
  if (!(mm.a11 > 0.0 && mm.det > 0.0) || !(mm.m + mm.m_x > 0.0)) {
    throw InvalidParameter("mass matrix is singular or not positive definite");
  }
}

ShipModel kcs_model() {
  ShipModel model;
  auto& p = model.principal;
  p.length_m = 230.0;
  p.beam_m = 32.2;
  p.draft_m = 10.8;
  p.displacement_m3 = 52030.0;
  p.x_g_m = -3.404;
  p.design_speed_mps = 12.347;
  p.rho_water = 1025.0;

  auto& c = model.mmg;
  c.m = 0.1821;
  c.m_x = 0.0091;
  c.m_y = 0.1600;
  c.j_z = 0.0100;
  c.i_zz = 0.0114;

  c.r_0 = 0.0140;
  c.x_vv = -0.0400;
  c.x_vr = 0.0020;
  c.x_rr = 0.0110;
  c.x_vvvv = 0.7710;
  c.y_v = -0.2800;
  c.y_r = 0.0700;
  c.y_vvv = -1.5000;
  c.y_vvr = 0.3790;
  c.y_vrr = -0.3910;
  c.y_rrr = 0.0080;
  c.n_v = -0.1150;
  c.n_r = -0.0500;
  c.n_vvv = -0.0300;
  c.n_vvr = -0.2940;
  c.n_vrr = 0.0550;
  c.n_rrr = -0.0130;

  c.d_p = 7.9;
  c.t_p = 0.15;
  c.w_p0 = 0.21;
  c.x_p = -0.48;
  c.k_0 = 0.5280;
  c.k_1 = -0.4170;
  c.k_2 = -0.1100;
  c.j_max = 0.9;

  c.a_r = 54.45;
  c.aspect_ratio = 1.827;
  c.f_alpha = 2.747;
  c.epsilon = 0.956;
  c.kappa = 0.633;
  c.t_r = 0.387;
  c.a_h = 0.312;
  c.x_h = -0.464;
  c.x_r = -0.5;
  c.gamma_r = 0.5;
  c.l_r = -0.71;

  auto& a = model.actuator;
  a.delta_max_rad = deg_to_rad(35.0);
  a.delta_rate_max_radps = deg_to_rad(5.0);
  a.propeller_rps = 1.9269;
  return model;
}

bool ShipState::is_finite() const { return all_finite({x, y, psi, u, v, r, delta, n_p}); }

double prime_ii_convert(double value, Quantity kind, Normalization direction,
                        const ShipPrincipalParams& params, double u_ref) {
  if (!(u_ref > 0.0)) throw InvalidParameter("prime-II reference speed must be positive");
  if (!(params.length_m > 0.0)) throw InvalidParameter("prime-II needs a positive ship length");
  const double length = params.length_m;
  const double mass = 0.5 * params.rho_water * length * length * params.draft_m;
  const double force = 0.5 * params.rho_water * length * params.draft_m * u_ref * u_ref;
  double scale = 1.0;
  switch (kind) {
    case Quantity::length: scale = length; break;
    case Quantity::speed: scale = u_ref; break;
    case Quantity::yaw_rate: scale = u_ref / length; break;
    case Quantity::time: scale = length / u_ref; break;
    case Quantity::force: scale = force; break;
    case Quantity::moment: scale = force * length; break;
    case Quantity::mass: scale = mass; break;
    case Quantity::inertia: scale = mass * length * length; break;
  }
  return direction == Normalization::to_prime ? value / scale : value * scale;
}

Loads hull_forces(double v, double r, const MmgCoefficients& c) {
  const double v2 = v * v;
  const double r2 = r * r;
  Loads f;
  f.x = -c.r_0 + c.x_vv * v2 + c.x_vr * v * r + c.x_rr * r2 + c.x_vvvv * v2 * v2;
  f.y = c.y_v * v + c.y_r * r + c.y_vvv * v2 * v + c.y_vvr * v2 * r + c.y_vrr * v * r2 +
        c.y_rrr * r2 * r;
  f.n = c.n_v * v + c.n_r * r + c.n_vvv * v2 * v + c.n_vvr * v2 * r + c.n_vrr * v * r2 +
        c.n_rrr * r2 * r;
  return f;
}

double effective_wake(double drift_angle, double r_prime, const MmgCoefficients& c) {
  const double beta_p = drift_angle - c.x_p * r_prime;
  return c.w_p0 * std::exp(-4.0 * beta_p * beta_p);
}

double propeller_thrust(double u, double v_prime, double r_prime, double n_p,
                        const MmgCoefficients& c, const ShipPrincipalParams& p) {
  if (n_p < 0.0) throw InvalidParameter("propeller rate must be non-negative");
  if (n_p == 0.0) return 0.0;
  const double beta = -std::asin(std::clamp(v_prime, -1.0, 1.0));
  const double w_p = effective_wake(beta, r_prime, c);
  const double advance = u * (1.0 - w_p) / (n_p * c.d_p);
  const double d2 = c.d_p * c.d_p;
  return p.rho_water * n_p * n_p * d2 * d2 * c.thrust_coefficient(advance);
}

Loads rudder_forces(const ShipState& s, double thrust, const MmgCoefficients& c,
                    const ShipPrincipalParams& p) {
  const double speed = s.speed();
  const double beta = drift_angle(s.u, s.v);
  const double r_prime = speed > kMinSpeed ? s.r * p.length_m / speed : 0.0;
  const double w_p = effective_wake(beta, r_prime, c);

  // Propeller race: u_P sqrt(1 + 8 K_T / (pi J^2)) == sqrt(u_P^2 + 8 T / (pi rho D^2)),
  // which stays finite at J = 0.
  const double u_p = s.u * (1.0 - w_p);
  const double race_sq = u_p * u_p + 8.0 * thrust / (kPi * p.rho_water * c.d_p * c.d_p);
  const double race = std::sqrt(std::max(race_sq, 0.0));
  const double span = std::sqrt(c.aspect_ratio * c.a_r);
  const double eta = c.d_p / span;
  const double slipstream = u_p + c.kappa * (race - u_p);
  const double u_r =
      c.epsilon * std::sqrt(std::max(eta * slipstream * slipstream + (1.0 - eta) * u_p * u_p, 0.0));

  const double beta_r = beta - c.l_r * r_prime;
  const double v_r = speed * c.gamma_r * beta_r;
  const double alpha_r = s.delta - std::atan2(v_r, u_r);
  const double inflow_sq = u_r * u_r + v_r * v_r;
  const double normal = 0.5 * p.rho_water * c.a_r * inflow_sq * c.f_alpha * std::sin(alpha_r);

  const double cos_d = std::cos(s.delta);
  return {-(1.0 - c.t_r) * normal * std::sin(s.delta),
          -(1.0 + c.a_h) * normal * cos_d,
          -(c.x_r + c.a_h * c.x_h) * p.length_m * normal * cos_d};
}

StateRate state_derivative(const ShipState& s, const Loads& external, const ShipModel& model) {
  const auto& p = model.principal;
  const auto& c = model.mmg;
  const double speed = s.speed();

  Loads hull;
  double v_prime = 0.0;
  double r_prime = 0.0;
  if (speed > kMinSpeed) {
    v_prime = s.v / speed;
    r_prime = s.r * p.length_m / speed;
    const double q = 0.5 * p.rho_water * p.length_m * p.draft_m * speed * speed;
    const Loads h = hull_forces(v_prime, r_prime, c);
    hull = {h.x * q, h.y * q, h.n * q * p.length_m};
  }
  const double thrust = propeller_thrust(s.u, v_prime, r_prime, s.n_p, c, p);
  const Loads rudder = rudder_forces(s, thrust, c, p);
  const Loads total = hull + rudder + external + Loads{(1.0 - c.t_p) * thrust, 0.0, 0.0};

  const MassMatrix mm = mass_matrix(model);
  if (!(mm.det > 0.0)) throw InvalidParameter("mass matrix is singular");

  StateRate rate;
  const double cpsi = std::cos(s.psi);
  const double spsi = std::sin(s.psi);
  rate.x = s.u * cpsi - s.v * spsi;
  rate.y = s.u * spsi + s.v * cpsi;
  rate.psi = s.r;
  rate.u = (total.x + (mm.m + mm.m_y) * s.v * s.r + mm.x_g * mm.m * s.r * s.r) / (mm.m + mm.m_x);
  const double b1 = total.y - (mm.m + mm.m_x) * s.u * s.r;
  const double b2 = total.n - mm.x_g * mm.m * s.u * s.r;
  rate.v = (b1 * mm.a22 - mm.a12 * b2) / mm.det;
  rate.r = (mm.a11 * b2 - mm.a12 * b1) / mm.det;
  return rate;
}

namespace {

ShipState advance(const ShipState& s, const StateRate& k, double h) {
  ShipState out = s;
  out.x += h * k.x;
  out.y += h * k.y;
  out.psi += h * k.psi;
  out.u += h * k.u;
  out.v += h * k.v;
  out.r += h * k.r;
  return out;
}

StateRate rate_with_wind(const ShipState& s, const WindField* wind, const ShipModel& model) {
  Loads external;
  if (wind != nullptr && wind->condition.speed_mps > 0.0) {
    external = wind_loads(s, wind->condition, wind->load_model, model.principal.length_m);
  }
  return state_derivative(s, external, model);
}

ShipState rk4_step(const ShipState& state, double delta_command, const WindField* wind,
                   const ShipModel& model, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("time step must be positive");
  const auto& act = model.actuator;
  const double command = std::clamp(delta_command, -act.delta_max_rad, act.delta_max_rad);
  const double max_change = act.delta_rate_max_radps * dt;

  ShipState s = state;
  s.delta = std::clamp(s.delta + std::clamp(command - s.delta, -max_change, max_change),
                       -act.delta_max_rad, act.delta_max_rad);

  const StateRate k1 = rate_with_wind(s, wind, model);
  const StateRate k2 = rate_with_wind(advance(s, k1, 0.5 * dt), wind, model);
  const StateRate k3 = rate_with_wind(advance(s, k2, 0.5 * dt), wind, model);
  const StateRate k4 = rate_with_wind(advance(s, k3, dt), wind, model);

  const double w = dt / 6.0;
  ShipState next = s;
  next.x += w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  next.y += w * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  next.psi = wrap_angle(s.psi + w * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi));
  next.u += w * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
  next.v += w * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  next.r += w * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);

  if (!next.is_finite()) {
    std::ostringstream msg;
    msg << "numerical blowup: x=" << next.x << " y=" << next.y << " psi=" << next.psi
        << " u=" << next.u << " v=" << next.v << " r=" << next.r;
    throw NumericalBlowup(msg.str(), next);
  }
  return next;
}

}  // namespace

ShipState step(const ShipState& state, double delta_command, const WindField& wind,
               const ShipModel& model, double dt) {
  return rk4_step(state, delta_command, &wind, model, dt);
}

ShipState step(const ShipState& state, double delta_command, const ShipModel& model, double dt) {
  return rk4_step(state, delta_command, nullptr, model, dt);
}

double dimensional_dt(const ShipModel& model, double dt_prime) {
  return prime_ii_convert(dt_prime, Quantity::time, Normalization::from_prime, model.principal,
                          model.principal.design_speed_mps);
}

}  // namespace helm
