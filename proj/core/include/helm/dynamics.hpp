#pragma once

#include <stdexcept>
#include <string>

#include "helm/ship.hpp"
#include "helm/wind.hpp"

namespace helm {

enum class Quantity { length, speed, yaw_rate, time, force, moment, mass, inertia };
enum class Normalization { to_prime, from_prime };

/// Prime-II (draft-based) scaling. Throws InvalidParameter for non-positive
/// reference speed or ship length.
double prime_ii_convert(double value, Quantity kind, Normalization direction,
                        const ShipPrincipalParams& params, double u_ref);

/// Non-dimensional hull forces X'_H (including -R'_0), Y'_H, N'_H.
Loads hull_forces(double v_prime, double r_prime, const MmgCoefficients& coeffs);

/// Effective wake fraction w_P = w_P0 exp(-4 beta_P^2), beta_P = beta - x'_P r'.
double effective_wake(double drift_angle, double r_prime, const MmgCoefficients& coeffs);

/// Propeller thrust T (N); the surge contribution is (1 - t_P) T.
/// Returns exactly 0 when n_p == 0.
double propeller_thrust(double u, double v_prime, double r_prime, double n_p,
                        const MmgCoefficients& coeffs, const ShipPrincipalParams& params);

/// Rudder-induced surge, sway and yaw loads in SI units (N, N, N m).
/// Positive rudder angle produces a positive (counter-clockwise) yaw moment.
Loads rudder_forces(const ShipState& state, double thrust, const MmgCoefficients& coeffs,
                    const ShipPrincipalParams& params);

/// Time derivative of the rigid-body part of the state.
struct StateRate {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double u = 0.0;
  double v = 0.0;
  double r = 0.0;
};

/// Kinematics plus MMG kinetics with the given external (wind) loads in SI.
StateRate state_derivative(const ShipState& state, const Loads& external, const ShipModel& model);

/// Raised when an integration step produces a non-finite state.
class NumericalBlowup : public std::runtime_error {
 public:
  NumericalBlowup(const std::string& what, const ShipState& offending)
      : std::runtime_error(what), state_(offending) {}
  const ShipState& state() const { return state_; }

 private:
  ShipState state_;
};

/// Advances one control interval: the rudder slews toward the (clamped)
/// command at the rate limit, then classic RK4 integrates the rigid-body
/// states over dt with the rudder held. psi is re-wrapped to (-pi, pi].
ShipState step(const ShipState& state, double delta_command, const WindField& wind,
               const ShipModel& model, double dt);

/// Calm water, zero wind step.
ShipState step(const ShipState& state, double delta_command, const ShipModel& model, double dt);

/// Control interval in seconds for a non-dimensional step dt'.
double dimensional_dt(const ShipModel& model, double dt_prime);

}  // namespace helm
