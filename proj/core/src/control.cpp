#include "helm/control.hpp"

#include <algorithm>
#include <utility>

#include "helm/errors.hpp"
#include "helm/mdp.hpp"
#include "helm/policy.hpp"

namespace helm {

void PdGains::validate() const {
  if (!(k_p > 0.0)) throw InvalidParameter("K_p must be positive");
  if (!(k_d >= 0.0)) throw InvalidParameter("K_d must be non-negative");
}

double pd_command(double psi_d, double psi, double r, const PdGains& gains, double delta_max_rad) {
  const double e = wrap_angle(psi_d - psi);
  return std::clamp(gains.k_p * e - gains.k_d * r, -delta_max_rad, delta_max_rad);
}

PdController::PdController(const ShipModel& model, PdGains gains, IlosParams ilos)
    : model_(model), gains_(gains), ilos_(ilos) {
  gains_.validate();
  ilos_.validate();
}

ControlOutput PdController::command(const ControlInput& in) const {
  const HeadingReference ref = ilos_desired_heading(in.state, in.path, in.guidance, ilos_, in.dt);
  ControlOutput out;
  out.delta_c = pd_command(ref.psi_d, in.state.psi, in.state.r, gains_, model_.actuator.delta_max_rad);
  out.guidance = ref.state;
  out.psi_d = ref.psi_d;
  return out;
}

PpoController::PpoController(const ShipModel& model, MlpParams actor)
    : model_(model), actor_(std::move(actor)) {}

ControlOutput PpoController::command(const ControlInput& in) const {
  if (actor_.empty()) throw NotReady("PPO controller has no policy weights");
  const Segment seg = active_segment(in.path, in.guidance);
  const Observation obs = observe(in.state, make_context(seg.start, seg.end), model_);
  ControlOutput out;
  out.delta_c = action_to_rudder(policy_mean(actor_, obs), model_.actuator.delta_max_rad);
  out.guidance = in.guidance;
  out.psi_d = in.state.psi;
  return out;
}

}  // namespace helm
