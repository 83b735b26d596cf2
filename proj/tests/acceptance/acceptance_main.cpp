// Acceptance checks: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "helm/bench.hpp"
#include "helm/checkpoint.hpp"
#include "helm/control.hpp"
#include "helm/dynamics.hpp"
#include "helm/mdp.hpp"
#include "helm/ppo.hpp"
#include "helm/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace helm;

namespace {

// Tolerances
constexpr double kGradTol = 1e-5;
constexpr double kGradStep = 1e-5;
// gradients smaller than this are compared in absolute terms
constexpr double kGradFloor = 1e-5;
constexpr double kGradSeconds = 60.0;
constexpr double kGaeTol = 1e-12;
constexpr double kStraightDriftL = 1e-9;
constexpr double kMirrorTolL = 1e-6;
constexpr double kSteadyTurnRdot = 1e-6;
constexpr double kPdRmsL = 1.0;
constexpr double kOffsetBandL = 0.1;
constexpr double kOffsetAlongL = 40.0;
constexpr double kFreshSuccess = 0.9;
constexpr int kFreshEpisodes = 100;
constexpr double kSmokeSeconds = 300.0;
constexpr int kQuadrantSteps = 160;
constexpr double kWindSteadyBandL = 0.5;
constexpr double kReportTol = 1e-9;

const ShipModel kModel = kcs_model();
const double kL = kModel.principal.length_m;
const double kDt = dimensional_dt(kModel, 0.3);

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[x] ";
    }
    detail << what << "; ";
  }
};

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "helm");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::cerr << "helm " << args[1] << " exited " << code << ": " << err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Random batch with ratios spread around 1 and a few inside the clip band.
ActorBatch random_actor_batch(const MlpParams& actor, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ActorBatch b;
  b.observations.resize(4, n);
  b.actions.resize(n);
  b.old_log_probs.resize(n);
  b.advantages.resize(n);
  for (int i = 0; i < n; ++i) {
    const Observation o{2.0 * g(rng), g(rng), 15.0 + 5.0 * g(rng), 0.2 * g(rng)};
    b.observations.col(i) = observation_vector(o);
    const double mu = policy_mean(actor, o);
    b.actions(i) = mu + std::exp(actor.log_std(0)) * g(rng);
    b.old_log_probs(i) = gaussian_log_prob(b.actions(i), mu, actor.log_std(0)) + 0.3 * g(rng);
    b.advantages(i) = g(rng);
  }
  return b;
}

Outcome criterion_gradients() {
  Outcome o;
  const auto t0 = Clock::now();
  PpoConfig cfg;
  std::mt19937_64 rng(2024);
  Learner l = make_learner(cfg, rng);
  // spread the output layer so the tanh head is exercised away from zero
  l.actor.layers.back().weight *= 50.0;
  const ActorBatch batch = random_actor_batch(l.actor, 16, rng);
  const ActorLoss al = actor_loss(l.actor, batch, cfg.clip, cfg.entropy_coef, true);
  const double actor_err = finite_diff_check(
      l.actor,
      [&](const MlpParams& p) { return actor_loss(p, batch, cfg.clip, cfg.entropy_coef, false).loss; },
      al.grad, kGradStep, kGradFloor);

  std::normal_distribution<double> g(0.0, 1.0);
  const Eigen::MatrixXd obs = Eigen::MatrixXd::NullaryExpr(4, 16, [&] { return g(rng); });
  const Eigen::VectorXd ret = Eigen::VectorXd::NullaryExpr(16, [&] { return g(rng); });
  const CriticLoss cl = critic_loss(l.critic, obs, ret, cfg.value_coef, true);
  const double critic_err = finite_diff_check(
      l.critic, [&](const MlpParams& p) { return critic_loss(p, obs, ret, cfg.value_coef, false).loss; },
      cl.grad, kGradStep, kGradFloor);
  const double secs = seconds_since(t0);
  o.check(actor_err < kGradTol, "actor max rel err " + fmt(actor_err));
  o.check(critic_err < kGradTol, "critic max rel err " + fmt(critic_err));
  o.check(secs < kGradSeconds, "runtime " + fmt(secs, "%.1f") + " s");
  return o;
}

Outcome criterion_gae() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<int> len(1, 10);
  RolloutBuffer buf;
  for (int e = 0; e < 1000; ++e) {
    EpisodeSpan span;
    span.begin = buf.steps.size();
    const int n = len(rng);
    for (int t = 0; t < n; ++t) {
      StepRecord s;
      s.reward = u(rng);
      s.value = u(rng);
      buf.steps.push_back(s);
    }
    span.end = buf.steps.size();
    span.bootstrap_value = (e % 3 == 0) ? u(rng) : 0.0;
    buf.episodes.push_back(span);
  }
  const double gamma = 0.96, lambda = 0.95;
  compute_gae(buf, gamma, lambda);

  double worst = 0.0;
  for (const auto& ep : buf.episodes) {
    for (std::size_t t = ep.begin; t < ep.end; ++t) {
      // brute-force sum of (gamma lambda)^k delta_{t+k}
      double a = 0.0, w = 1.0;
      for (std::size_t k = t; k < ep.end; ++k) {
        const double next_v = k + 1 < ep.end ? buf.steps[k + 1].value : ep.bootstrap_value;
        a += w * (buf.steps[k].reward + gamma * next_v - buf.steps[k].value);
        w *= gamma * lambda;
      }
      worst = std::max(worst, std::abs(a - buf.advantages[t]));
      worst = std::max(worst, std::abs(a + buf.steps[t].value - buf.returns[t]));
    }
  }
  o.check(worst < kGaeTol, "1000 episodes, max abs diff " + fmt(worst));
  return o;
}

ShipState cruise() {
  ShipState s;
  s.u = kModel.principal.design_speed_mps;
  s.n_p = kModel.actuator.propeller_rps;
  return s;
}

Outcome criterion_symmetry() {
  Outcome o;
  ShipState s = cruise();
  double max_y = 0.0;
  while (s.x < 100.0 * kL) {
    s = step(s, 0.0, kModel, kDt);
    max_y = std::max(max_y, std::abs(s.y));
  }
  o.check(max_y < kStraightDriftL * kL, "straight 100L max |y| " + fmt(max_y / kL) + " L");

  double mirror = 0.0;
  for (double deg : {10.0, 20.0, 35.0}) {
    ShipState a = cruise(), b = cruise();
    for (int i = 0; i < 500; ++i) {
      a = step(a, deg_to_rad(deg), kModel, kDt);
      b = step(b, deg_to_rad(-deg), kModel, kDt);
      mirror = std::max({mirror, std::abs(a.x - b.x), std::abs(a.y + b.y),
                         kL * std::abs(wrap_angle(a.psi + b.psi))});
    }
  }
  o.check(mirror < kMirrorTolL * kL, "mirror max dev " + fmt(mirror / kL) + " L");

  ShipState t = cruise();
  double rdot = 1.0;
  int steps = 0;
  for (; steps < 3000 && std::abs(rdot) >= kSteadyTurnRdot; ++steps) {
    t = step(t, deg_to_rad(35.0), kModel, kDt);
    rdot = state_derivative(t, {}, kModel).r;
  }
  // and it stays there
  double later = 0.0;
  for (int i = 0; i < 500; ++i) {
    t = step(t, deg_to_rad(35.0), kModel, kDt);
    later = std::max(later, std::abs(state_derivative(t, {}, kModel).r));
  }
  rdot = std::max(std::abs(rdot), later);
  o.check(rdot < kSteadyTurnRdot, "35 deg turn |rdot| " + fmt(rdot) + " rad/s^2 reached at step " +
                                                std::to_string(steps) + ", diameter " +
                                                fmt(2.0 * t.speed() / t.r / kL, "%.2f") + " L");
  return o;
}

Outcome criterion_reward() {
  Outcome o;
  const RewardBreakdown zero = reward({});
  o.check(zero.r1 == 1.0 && zero.r2 == 1.0 && zero.r3 == 0.0, "r1(0)=1, r2(0)=1, r3(0)=0");
  Observation far;
  far.d_c = std::sqrt(12.5);
  const double r1 = reward(far).r1;
  o.check(std::abs(r1 - (2.0 / std::exp(1.0) - 1.0)) < 1e-12, "r1(d_c^2=12.5) = " + fmt(r1, "%.6f"));

  // straight run onto a goal dead ahead: bonus must appear exactly once
  EpisodeConfig cfg;
  const WindField calm = calm_wind();
  ShipState s = cruise();
  EpisodeContext ctx = make_context({0.0, 0.0}, {8.0 * kL, 0.0});
  EpisodeStatus status = EpisodeStatus::running;
  int bonuses = 0;
  double ret = 0.0, shaped = 0.0;
  while (status == EpisodeStatus::running) {
    const StepResult r = env_step(s, ctx, 0.0, kModel, calm, cfg);
    bonuses += r.reward.terminal_bonus == kSuccessBonus;
    ret += r.reward.total;
    shaped += r.reward.r1 + r.reward.r2 + r.reward.r3;
    s = r.state;
    ctx = r.context;
    status = r.status;
  }
  o.check(status == EpisodeStatus::success && bonuses == 1 && ret - shaped == kSuccessBonus,
          "success bonus added once (" + std::to_string(bonuses) + ")");

  const EpisodeContext leg = make_context({0.0, 0.0}, {10.0 * kL, 0.0});
  ShipState past;
  past.x = 11.0 * kL;
  past.u = 5.0;
  o.check(is_terminal(past, leg, cfg, kModel) == EpisodeStatus::overshoot, "past goal moving away: overshoot");
  ShipState approach;
  approach.x = 5.0 * kL;
  approach.u = 5.0;
  o.check(is_terminal(approach, leg, cfg, kModel) == EpisodeStatus::running, "approach: running");
  return o;
}

RunResult run_pd(const Scenario& s) {
  const PdController pd(kModel, {2.0, 4.0}, default_ilos(kL));
  return run_scenario(s, pd, kModel, kDt);
}

Outcome criterion_pd() {
  Outcome o;
  for (const Scenario& s : {square_scenario(kModel, 10.0), eight_scenario(kModel, 6.0, 20)}) {
    const RunResult r = run_pd(s);
    const auto& m = r.metrics;
    o.check(m.success && static_cast<int>(m.capture_times_s.size()) == m.waypoints,
            s.name + " captured " + std::to_string(m.capture_times_s.size()) + "/" + std::to_string(m.waypoints));
    o.check(m.rms_cross_track_post_L < kPdRmsL,
            s.name + " post-transient rms " + fmt(m.rms_cross_track_post_L) + " L");
  }
  const RunResult off = run_pd(straight_scenario(kModel, 2.0));
  double worst = 0.0;
  bool reached = false;
  for (const auto& row : off.trajectory) {
    if (row.x_m >= kOffsetAlongL * kL) {
      reached = true;
      worst = std::max(worst, std::abs(row.d_c_L));
    }
  }
  o.check(reached && worst < kOffsetBandL, "2L offset: max |d_c| beyond 40L " + fmt(worst) + " L");
  return o;
}

struct Trained {
  bool ok = false;
  fs::path dir;
  MlpParams actor;
};

Outcome criterion_training(const fs::path& root, Trained& trained) {
  Outcome o;
  const fs::path smoke = root / "smoke";
  auto t0 = Clock::now();
  const int smoke_code = cli({"train", "--iterations", "2", "--seed", "0", "--out", smoke.string()});
  const double smoke_secs = seconds_since(t0);
  o.check(smoke_code == 0 && fs::exists(smoke / "checkpoints" / "ckpt_0002.bin") && smoke_secs < kSmokeSeconds,
          "--iterations 2 smoke " + fmt(smoke_secs, "%.0f") + " s");

  trained.dir = root / "train";
  t0 = Clock::now();
  const int code = cli({"train", "--seed", "0", "--out", trained.dir.string()});
  const double train_secs = seconds_since(t0);
  o.check(code == 0, "full training exit " + std::to_string(code) + " in " + fmt(train_secs, "%.0f") + " s");
  if (code != 0) return o;

  std::ifstream log_in(trained.dir / "train_log.csv");
  const auto log = read_train_log_csv(log_in);
  o.check(log.size() == 100, std::to_string(log.size()) + " log rows");
  if (log.size() < 20) return o;
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    first += log[i].mean_return / 10.0;
    last += log[log.size() - 10 + i].mean_return / 10.0;
  }
  o.check(last > first, "mean return first 10 " + fmt(first, "%.1f") + " -> last 10 " + fmt(last, "%.1f"));

  const Checkpoint ckpt = load_checkpoint(trained.dir / "policy.bin");
  trained.actor = ckpt.actor;
  const WindField calm = calm_wind();
  const EpisodeConfig episode;
  const EpisodeRunner env{kModel, calm, episode};
  const PolicyEvaluation ev = evaluate_policy(ckpt.actor, env, kFreshSeedOffset, kFreshEpisodes);
  o.check(ev.success_rate >= kFreshSuccess, "selected iteration " + std::to_string(ckpt.iteration) +
                                                 ", fresh success " + fmt(ev.success_rate) + " over " +
                                                 std::to_string(kFreshEpisodes));
  trained.ok = true;
  return o;
}

Outcome criterion_quadrants(const Trained& t) {
  Outcome o;
  if (!t.ok) {
    o.check(false, "no trained policy");
    return o;
  }
  const PpoController ppo(kModel, t.actor);
  for (Scenario s : quadrant_scenarios(kModel)) {
    s.step_cap = kQuadrantSteps;
    const RunResult r = run_scenario(s, ppo, kModel, kDt);
    o.check(r.metrics.success && r.metrics.steps < kQuadrantSteps,
            s.name + " " + std::string(to_string(r.metrics.status)) + " in " + std::to_string(r.metrics.steps));
  }
  return o;
}

Outcome criterion_paths(const Trained& t) {
  Outcome o;
  if (!t.ok) {
    o.check(false, "no trained policy");
    return o;
  }
  const PpoController ppo(kModel, t.actor);
  const Scenario wind = build_scenario("wind_beam_6U", kModel);
  for (const Scenario& s : {ellipse_scenario(kModel), eight_scenario(kModel, 9.0, 23), wind}) {
    const RunResult r = run_scenario(s, ppo, kModel, kDt);
    o.check(r.metrics.success, "ppo " + s.name + " " + std::string(to_string(r.metrics.status)) + ", rms " +
                                   fmt(r.metrics.rms_cross_track_L) + " L");
  }
  const RunResult pd = run_pd(wind);
  // steady state: the last quarter of the run
  double steady = 0.0;
  for (std::size_t i = pd.trajectory.size() * 3 / 4; i < pd.trajectory.size(); ++i) {
    steady = std::max(steady, std::abs(pd.trajectory[i].d_c_L));
  }
  o.check(pd.metrics.success, "pd " + wind.name + " " + std::string(to_string(pd.metrics.status)));
  o.check(steady < kWindSteadyBandL, "pd steady |d_c| " + fmt(steady) + " L");
  return o;
}

double rms_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

Outcome criterion_compare(const fs::path& root, const Trained& t) {
  Outcome o;
  if (!t.ok) {
    o.check(false, "no trained policy");
    return o;
  }
  const fs::path dir = root / "compare";
  const int code = cli({"compare", "--scenario", "eight_6L_20", "--checkpoint", (t.dir / "policy.bin").string(),
                        "--out", dir.string()});
  o.check(code == 0, "compare exit " + std::to_string(code));
  if (code != 0) return o;

  struct Recomputed {
    double rms = 0.0;
    double effort = 0.0;
  };
  auto recompute = [&](const fs::path& csv) {
    std::ifstream in(csv);
    const Trajectory traj = read_trajectory_csv(in);
    std::vector<double> dc, rate;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      dc.push_back(traj[i].d_c_L);
      if (i > 0) rate.push_back((traj[i].delta_rad - traj[i - 1].delta_rad) / (traj[i].t_s - traj[i - 1].t_s));
    }
    return Recomputed{rms_of(dc), rms_of(rate)};
  };
  const Recomputed a = recompute(dir / "eight_6L_20_a_ppo_trajectory.csv");
  const Recomputed b = recompute(dir / "eight_6L_20_b_pd_trajectory.csv");
  std::ifstream rep_in(dir / "eight_6L_20_compare.json");
  const ComparisonReport rep = read_report_json(rep_in);

  o.check(a.rms <= b.rms, "rms ppo " + fmt(a.rms) + " L vs pd " + fmt(b.rms) + " L (reduction " +
                              fmt(rep.rms_reduction_pct, "%.1f") + " %)");
  o.check(a.effort >= b.effort, "effort ppo " + fmt(a.effort) + " vs pd " + fmt(b.effort) + " rad/s");
  const double dev = std::max({std::abs(rep.a.rms_cross_track_L - a.rms), std::abs(rep.b.rms_cross_track_L - b.rms),
                               std::abs(rep.a.rudder_effort_radps - a.effort),
                               std::abs(rep.b.rudder_effort_radps - b.effort),
                               std::abs(rep.rms_reduction_pct - (b.rms - a.rms) / b.rms * 100.0),
                               std::abs(rep.effort_ratio - a.effort / b.effort)});
  o.check(dev < kReportTol, "report re-derived from CSVs, max dev " + fmt(dev));
  return o;
}

// Runs a command twice into the same directory and compares every file.
bool identical_reruns(const fs::path& dir, const std::function<int(const fs::path&)>& command, std::string& note) {
  fs::remove_all(dir);
  const int c1 = command(dir);
  const fs::path first = dir.string() + "_first";
  fs::remove_all(first);
  fs::rename(dir, first);
  const int c2 = command(dir);
  if (c1 != c2) {
    note = "exit codes differ";
    return false;
  }
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(first)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), first);
    if (!fs::exists(dir / rel) || slurp(e.path()) != slurp(dir / rel)) {
      note = rel.string() + " differs";
      return false;
    }
    ++files;
  }
  int files2 = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) files2 += e.is_regular_file();
  note = std::to_string(files) + " files";
  return files > 0 && files == files2;
}

Outcome criterion_determinism(const fs::path& root, const Trained& t) {
  Outcome o;
  std::string note;
  bool ok = identical_reruns(root / "det_sim", [](const fs::path& d) {
    return cli({"simulate", "--scenario", "all", "--seed", "3", "--out", d.string()});
  }, note);
  o.check(ok, "simulate all: " + note);
  ok = identical_reruns(root / "det_train", [](const fs::path& d) {
    return cli({"train", "--iterations", "2", "--seed", "7", "--out", d.string()});
  }, note);
  o.check(ok, "train smoke: " + note);
  if (t.ok) {
    const std::string ckpt = (t.dir / "policy.bin").string();
    ok = identical_reruns(root / "det_cmp", [&](const fs::path& d) {
      return cli({"compare", "--scenario", "eight_6L_20", "--checkpoint", ckpt, "--out", d.string()});
    }, note);
    o.check(ok, "compare: " + note);
    ok = identical_reruns(root / "det_eval", [&](const fs::path& d) {
      return cli({"eval", "--checkpoint", ckpt, "--episodes", "20", "--out", d.string()});
    }, note);
    o.check(ok, "eval: " + note);
  }
  return o;
}

void report(int id, const char* title, const Outcome& o, int& failures) {
  std::string d = o.detail.str();
  if (d.size() >= 2) d.resize(d.size() - 2);
  std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << id << ' ' << title << ": " << d << std::endl;
  failures += !o.pass;
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "helm_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  int failures = 0;
  report(1, "gradient exactness", criterion_gradients(), failures);
  report(2, "GAE oracle", criterion_gae(), failures);
  report(3, "dynamics symmetry", criterion_symmetry(), failures);
  report(4, "reward and termination", criterion_reward(), failures);
  report(5, "PD+ILOS baseline", criterion_pd(), failures);
  Trained trained;
  report(6, "training reproduction", criterion_training(root, trained), failures);
  report(7, "quadrant destinations", criterion_quadrants(trained), failures);
  report(8, "ellipse, eight and wind", criterion_paths(trained), failures);
  report(9, "PPO vs PD on eight", criterion_compare(root, trained), failures);
  report(10, "determinism", criterion_determinism(root, trained), failures);

  std::cout << (failures == 0 ? "all criteria passed" : "failed criteria: " + std::to_string(failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
