#include <gtest/gtest.h>

#include <random>

#include "helm/control.hpp"
#include "helm/errors.hpp"
#include "helm/ppo.hpp"

using namespace helm;

namespace {

const ShipModel kModel = kcs_model();
const double kMax = deg_to_rad(35.0);

WaypointPath x_path() {
  WaypointPath p;
  p.points = {{20.0 * kModel.principal.length_m, 0.0}};
  p.acceptance_radius_m = 0.5 * kModel.principal.length_m;
  return p;
}

}  // namespace

TEST(Pd, Examples) {
  const PdGains g;
  EXPECT_DOUBLE_EQ(pd_command(0.7, 0.7, 0.0, g, kMax), 0.0);
  EXPECT_NEAR(pd_command(0.1, 0.0, 0.0, g, kMax), 0.2, 1e-15);
  EXPECT_NEAR(pd_command(1.0, 0.0, 0.0, g, kMax), 0.6109, 1e-4);
  EXPECT_DOUBLE_EQ(pd_command(1.0, 0.0, 0.0, g, kMax), kMax);
  EXPECT_DOUBLE_EQ(pd_command(0.0, 0.0, 0.01, g, kMax), -0.04);
}

TEST(Pd, WrapsHeadingError) {
  const PdGains g;
  EXPECT_NEAR(pd_command(deg_to_rad(-175.0), deg_to_rad(175.0), 0.0, g, kMax), 2.0 * deg_to_rad(10.0), 1e-12);
}

TEST(Pd, GainValidation) {
  EXPECT_THROW((PdGains{-1.0, 4.0}).validate(), InvalidParameter);
}

TEST(PdController, OnPathAlignedIsZero) {
  const PdController pd(kModel, {}, default_ilos(kModel.principal.length_m));
  ShipState s;
  s.u = kModel.principal.design_speed_mps;
  const WaypointPath p = x_path();
  const GuidanceState g;
  const ControlOutput a = pd.command({s, p, g, 5.0});
  const ControlOutput b = pd.command({s, p, g, 5.0});
  EXPECT_EQ(a.delta_c, 0.0);
  EXPECT_EQ(a.delta_c, b.delta_c);
  EXPECT_EQ(a.psi_d, 0.0);
  EXPECT_EQ(pd.name(), "pd");
}

TEST(PpoController, ZeroNetworkGivesZero) {
  PpoConfig c;
  c.actor_hidden = {8};
  std::mt19937_64 rng(1);
  MlpParams actor = make_learner(c, rng).actor;
  actor.layers.back().weight.setZero();
  actor.layers.back().bias.setZero();
  const PpoController ppo(kModel, actor);
  ShipState s;
  s.u = 5.0;
  s.y = 300.0;
  s.psi = 0.4;
  const WaypointPath p = x_path();
  EXPECT_EQ(ppo.command({s, p, GuidanceState{}, 5.0}).delta_c, 0.0);
}

TEST(PpoController, EmptyActorNotReady) {
  const PpoController ppo(kModel, MlpParams{});
  ShipState s;
  const WaypointPath p = x_path();
  EXPECT_THROW(ppo.command({s, p, GuidanceState{}, 5.0}), NotReady);
}
