#pragma once

#include <string_view>

#include "helm/guidance.hpp"
#include "helm/mlp.hpp"
#include "helm/ship.hpp"

namespace helm {

struct PdGains {
  double k_p = 2.0;
  double k_d = 4.0;  ///< s

  void validate() const;
};

/// clamp(K_p wrap(psi_d - psi) - K_d r, +-delta_max).
double pd_command(double psi_d, double psi, double r, const PdGains& gains, double delta_max_rad);

struct ControlInput {
  const ShipState& state;
  const WaypointPath& path;
  const GuidanceState& guidance;
  double dt = 0.0;  ///< control interval (s)
};

struct ControlOutput {
  double delta_c = 0.0;
  GuidanceState guidance;  ///< updated guidance state (ILOS integral)
  double psi_d = 0.0;      ///< desired heading when the controller has one, else psi
};

/// Uniform calling convention for the bench harness.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual ControlOutput command(const ControlInput& in) const = 0;
  virtual std::string_view name() const = 0;
};

/// ILOS guidance followed by the PD heading autopilot.
class PdController final : public Controller {
 public:
  PdController(const ShipModel& model, PdGains gains, IlosParams ilos);
  ControlOutput command(const ControlInput& in) const override;
  std::string_view name() const override { return "pd"; }

 private:
  const ShipModel& model_;
  PdGains gains_;
  IlosParams ilos_;
};

/// Deterministic (mean action) PPO policy tracking the active segment.
class PpoController final : public Controller {
 public:
  PpoController(const ShipModel& model, MlpParams actor);
  /// Throws NotReady when the actor has no weights.
  ControlOutput command(const ControlInput& in) const override;
  std::string_view name() const override { return "ppo"; }

 private:
  const ShipModel& model_;
  MlpParams actor_;
};

}  // namespace helm
