#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "helm/angles.hpp"
#include "helm/bench.hpp"
#include "helm/control.hpp"
#include "helm/mdp.hpp"
#include "helm/ppo.hpp"
#include "helm/ship.hpp"
#include "helm/wind.hpp"

namespace helm {

struct ControllerConfig {
  PdGains pd;
  double ilos_lookahead_L = 2.0;
  double ilos_integral_gain = 0.05;
};

struct ScenarioConfig {
  std::string name = "eight_6L_20";
  int step_cap = kDefaultStepCap;
  double dt_prime = 0.3;
  /// Custom path in ship lengths; when set it replaces the built-in geometry.
  std::vector<Vec2> waypoints_L;
  std::optional<Vec2> start_L;
  std::optional<double> psi0_rad;
};

/// Every tunable of a run. Each JSON section is optional; defaults are the
/// compiled-in values.
struct RunConfig {
  ShipModel model = kcs_model();
  WindField wind = calm_wind();
  ControllerConfig controller;
  PpoConfig ppo;
  EpisodeConfig episode;
  ScenarioConfig scenario;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first invalid value.
  void validate() const;

  double dt_s() const;
  IlosParams ilos() const;
  /// Scenario named in the config with its wind, overrides and step cap applied.
  Scenario make_scenario() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& config);

}  // namespace helm
