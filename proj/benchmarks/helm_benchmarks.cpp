#include <benchmark/benchmark.h>

#include <random>

#include "helm/bench.hpp"
#include "helm/control.hpp"
#include "helm/dynamics.hpp"
#include "helm/ppo.hpp"

using namespace helm;

namespace {

const ShipModel kModel = kcs_model();

void BM_Step(benchmark::State& state) {
  ShipState s;
  s.u = kModel.principal.design_speed_mps;
  s.n_p = kModel.actuator.propeller_rps;
  const WindField wind = calm_wind();
  const double dt = dimensional_dt(kModel, 0.3);
  for (auto _ : state) {
    s = step(s, 0.3, wind, kModel, dt);
    benchmark::DoNotOptimize(s);
    if (s.x > 1e6) s.x = s.y = 0.0;
  }
}
BENCHMARK(BM_Step);

void BM_MlpForwardBackward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const std::vector<int> sizes{4, 128, 128, 1};
  const MlpParams p = make_mlp(sizes, rng, {});
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, state.range(0));
  const Eigen::MatrixXd up = Eigen::MatrixXd::Ones(1, state.range(0));
  for (auto _ : state) {
    ForwardCache cache;
    benchmark::DoNotOptimize(forward(p, x, &cache));
    benchmark::DoNotOptimize(gradients(p, cache, up));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(1)->Arg(256)->Arg(4096);

void BM_CollectIteration(benchmark::State& state) {
  PpoConfig cfg;
  std::mt19937_64 rng(2);
  const Learner l = make_learner(cfg, rng);
  const WindField wind = calm_wind();
  const EpisodeConfig episode;
  const EpisodeRunner env{kModel, wind, episode};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(collect_iteration(l.actor, l.critic, env, seed, 10, 1));
    seed += 10;
  }
}
BENCHMARK(BM_CollectIteration)->Unit(benchmark::kMillisecond);

void BM_PdEight(benchmark::State& state) {
  const PdController pd(kModel, {}, default_ilos(kModel.principal.length_m));
  const Scenario s = eight_scenario(kModel, 6.0, 20);
  const double dt = dimensional_dt(kModel, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(s, pd, kModel, dt));
}
BENCHMARK(BM_PdEight)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
