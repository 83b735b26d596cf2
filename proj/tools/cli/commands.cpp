#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "helm/bench.hpp"
#include "helm/checkpoint.hpp"
#include "helm/errors.hpp"
#include "helm/ppo.hpp"
#include "helm/run_config.hpp"
#include "helm/trajectory_io.hpp"

namespace helm::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

RunConfig resolve_config(const Options& opt) {
  RunConfig cfg = opt.config_path.empty() ? RunConfig{} : load_run_config(opt.config_path);
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.ppo.seed = *opt.seed;
    cfg.episode.seed = *opt.seed;
  }
  if (opt.iterations) cfg.ppo.iterations = *opt.iterations;
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
  if (!opt.scenario.empty() && opt.scenario != "all") {
    cfg.scenario.name = opt.scenario;
    cfg.scenario.waypoints_L.clear();
    cfg.scenario.start_L.reset();
    cfg.scenario.psi0_rad.reset();
  }
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

std::unique_ptr<Controller> make_controller(const std::string& name, const RunConfig& cfg,
                                            const std::string& checkpoint) {
  if (name == "pd") return std::make_unique<PdController>(cfg.model, cfg.controller.pd, cfg.ilos());
  if (name == "ppo") {
    if (checkpoint.empty()) throw ConfigError("the ppo controller needs --checkpoint");
    Checkpoint ckpt;
    try {
      ckpt = load_checkpoint(checkpoint);
    } catch (const InvalidParameter& e) {
      throw ConfigError(e.what());
    }
    return std::make_unique<PpoController>(cfg.model, std::move(ckpt.actor));
  }
  throw ConfigError("unknown controller '" + name + "' (expected pd or ppo)");
}

struct WrittenRun {
  std::string trajectory;
  std::string metrics;
};

WrittenRun write_run(const fs::path& dir, const std::string& stem, const RunResult& run) {
  WrittenRun w{stem + "_trajectory.csv", stem + "_metrics.json"};
  {
    auto f = open_out(dir / w.trajectory);
    write_trajectory_csv(f, run.trajectory);
  }
  {
    auto f = open_out(dir / w.metrics);
    write_metrics_json(f, run.metrics);
  }
  return w;
}

void print_metrics(std::ostream& out, const RunMetrics& m) {
  out << std::left << std::setw(20) << m.scenario << std::setw(5) << m.controller << std::setw(10)
      << to_string(m.status) << " steps " << std::setw(6) << m.steps << " rms_dc " << std::setw(10)
      << m.rms_cross_track_L << " effort " << m.rudder_effort_radps << '\n';
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidParameter& e) {
    err << "invalid parameter: " << e.what() << '\n';
    return kConfigError;
  } catch (const TrainingFailed& e) {
    err << "training failed: " << e.what() << '\n';
    return kTrainingFailed;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kRunFailed;
  }
}

}  // namespace

int simulate(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = resolve_config(opt);
    std::vector<Scenario> scenarios;
    if (opt.scenario == "all") {
      for (const auto& name : builtin_scenario_names()) {
        RunConfig c = cfg;
        c.scenario.name = name;
        c.scenario.waypoints_L.clear();
        scenarios.push_back(c.make_scenario());
      }
    } else {
      scenarios.push_back(cfg.make_scenario());
    }
    auto controller = make_controller(opt.controller, cfg, opt.checkpoint);
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);

    std::vector<ManifestEntry> manifest;
    bool all_ok = true;
    for (const auto& s : scenarios) {
      const RunResult run = run_scenario(s, *controller, cfg.model, cfg.dt_s());
      const WrittenRun w = write_run(dir, s.name + "_" + std::string(controller->name()), run);
      manifest.push_back({s.name, std::string(controller->name()), w.trajectory, w.metrics,
                          std::string(to_string(run.metrics.status))});
      print_metrics(out, run.metrics);
      if (!run.metrics.success) {
        all_ok = false;
        err << s.name << ": run did not complete (" << to_string(run.metrics.status) << ")"
            << (run.metrics.error.empty() ? "" : ": " + run.metrics.error) << '\n';
      }
    }
    if (scenarios.size() > 1) {
      auto f = open_out(dir / "manifest.json");
      write_manifest_json(f, manifest);
    }
    return all_ok ? kOk : kRunFailed;
  });
}

int train(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(opt);
    const fs::path dir = cfg.output_dir;
    const fs::path ckpt_dir = dir / "checkpoints";
    fs::create_directories(ckpt_dir);
    {
      auto f = open_out(dir / "config.json");
      f << dump_run_config(cfg);
    }

    const WindField calm{{0.0, 0.0}, cfg.wind.load_model};
    const EpisodeRunner env{cfg.model, calm, cfg.episode};
    auto log = open_out(dir / "train_log.csv");
    log << train_log_header() << '\n' << std::flush;

    std::vector<std::pair<std::uint32_t, MlpParams>> actors;
    auto observer = [&](const TrainLogRow& row, const Checkpoint& ckpt) {
      log << train_log_line(row) << '\n' << std::flush;
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%04u.bin", ckpt.iteration);
      save_checkpoint(ckpt_dir / name, ckpt);
      actors.emplace_back(ckpt.iteration, ckpt.actor);
      out << "iter " << std::setw(4) << row.iteration << "  return " << std::setw(10) << row.mean_return
          << "  success " << std::setw(5) << row.success_rate << "  " << row.status << '\n'
          << std::flush;
    };
    helm::train(cfg.ppo, env, observer);

    std::vector<CandidateScore> scores;
    ordered_json cands = ordered_json::array();
    for (const auto& [iteration, actor] : actors) {
      const PolicyEvaluation ev =
          evaluate_policy(actor, env, cfg.seed + kSelectionSeedOffset, cfg.ppo.selection_episodes);
      scores.push_back({iteration, ev.success_rate, ev.mean_rms_cross_track_L});
      cands.push_back({{"iteration", iteration},
                       {"success_rate", ev.success_rate},
                       {"rms_cross_track_L", ev.mean_rms_cross_track_L},
                       {"mean_return", ev.mean_return}});
    }
    const CandidateScore best = scores[select_policy(scores)];
    char name[32];
    std::snprintf(name, sizeof(name), "ckpt_%04u.bin", best.iteration);
    fs::copy_file(ckpt_dir / name, dir / "policy.bin", fs::copy_options::overwrite_existing);
    ordered_json sel;
    sel["selection_episodes"] = cfg.ppo.selection_episodes;
    sel["selection_first_seed"] = cfg.seed + kSelectionSeedOffset;
    sel["selected_iteration"] = best.iteration;
    sel["selected_checkpoint"] = std::string("checkpoints/") + name;
    sel["candidates"] = cands;
    {
      auto f = open_out(dir / "selection.json");
      f << sel.dump(2) << '\n';
    }
    out << "selected checkpoint: " << (ckpt_dir / name).string() << " (success " << best.success_rate
        << ", rms " << best.rms_cross_track_L << " L), copied to " << (dir / "policy.bin").string() << '\n';
    return kOk;
  });
}

int eval(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(opt);
    if (opt.checkpoint.empty()) throw ConfigError("eval needs --checkpoint");
    Checkpoint ckpt;
    try {
      ckpt = load_checkpoint(opt.checkpoint);
    } catch (const InvalidParameter& e) {
      throw ConfigError(e.what());
    }
    const int n = opt.episodes > 0 ? opt.episodes : cfg.ppo.selection_episodes;
    const WindField calm{{0.0, 0.0}, cfg.wind.load_model};
    const EpisodeRunner env{cfg.model, calm, cfg.episode};
    const std::uint64_t first = cfg.seed + kFreshSeedOffset;
    const PolicyEvaluation ev = evaluate_policy(ckpt.actor, env, first, n);

    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    ordered_json j;
    j["checkpoint_iteration"] = ckpt.iteration;
    j["episodes"] = ev.episodes;
    j["first_seed"] = first;
    j["success_rate"] = ev.success_rate;
    j["mean_rms_cross_track_L"] = ev.mean_rms_cross_track_L;
    j["mean_return"] = ev.mean_return;
    auto f = open_out(dir / "eval.json");
    f << j.dump(2) << '\n';
    out << "success rate " << ev.success_rate << " over " << n << " episodes, mean rms "
        << ev.mean_rms_cross_track_L << " L\n";
    return kOk;
  });
}

int compare(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(opt);
    const Scenario s = cfg.make_scenario();
    auto a = make_controller(opt.controller_a, cfg, opt.checkpoint);
    auto b = make_controller(opt.controller_b, cfg, opt.checkpoint);
    const Comparison c = helm::compare(s, *a, *b, cfg.model, cfg.dt_s());

    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    write_run(dir, s.name + "_a_" + std::string(a->name()), c.a);
    write_run(dir, s.name + "_b_" + std::string(b->name()), c.b);
    {
      auto f = open_out(dir / (s.name + "_compare.json"));
      write_report_json(f, c.report);
    }
    print_metrics(out, c.report.a);
    print_metrics(out, c.report.b);
    out << "rms reduction (a vs b): " << c.report.rms_reduction_pct << " %\n"
        << "post-transient rms reduction: " << c.report.rms_post_reduction_pct << " %\n"
        << "effort ratio (a / b): " << c.report.effort_ratio << '\n';
    if (!c.report.valid) {
      err << "comparison invalid: at least one run did not complete\n";
      return kRunFailed;
    }
    return kOk;
  });
}

int list_scenarios(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(opt);
    const double l = cfg.model.principal.length_m;
    for (const auto& name : builtin_scenario_names()) {
      const Scenario s = build_scenario(name, cfg.model);
      out << std::left << std::setw(20) << name << std::setw(4) << s.path.size() << " waypoints  wind "
          << s.wind.condition.speed_mps << " m/s  start (" << s.start.x / l << ", " << s.start.y / l
          << ") L\n";
    }
    return kOk;
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ship path following: MMG simulation, PPO training and PD comparison"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  int iterations = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--out", opt.out_dir, "output directory");
  };

  auto* sim = app.add_subcommand("simulate", "run one scenario (or all) with a controller");
  common(sim);
  sim->add_option("--scenario", opt.scenario, "scenario name or 'all'");
  sim->add_option("--controller", opt.controller, "pd or ppo")->check(CLI::IsMember({"pd", "ppo"}));
  sim->add_option("--checkpoint", opt.checkpoint, "policy checkpoint for the ppo controller");

  auto* tr = app.add_subcommand("train", "train a PPO policy");
  common(tr);
  tr->add_option("--iterations", iterations, "override ppo.iterations")->check(CLI::PositiveNumber);

  auto* ev = app.add_subcommand("eval", "evaluate a policy on fresh random episodes");
  common(ev);
  ev->add_option("--checkpoint", opt.checkpoint, "policy checkpoint")->required();
  ev->add_option("--episodes", opt.episodes, "number of episodes")->check(CLI::PositiveNumber);

  auto* cmp = app.add_subcommand("compare", "run two controllers on one scenario");
  common(cmp);
  cmp->add_option("--scenario", opt.scenario, "scenario name");
  cmp->add_option("--checkpoint", opt.checkpoint, "policy checkpoint for ppo");
  cmp->add_option("--a", opt.controller_a, "controller A (default ppo)")->check(CLI::IsMember({"pd", "ppo"}));
  cmp->add_option("--b", opt.controller_b, "controller B (default pd)")->check(CLI::IsMember({"pd", "ppo"}));

  auto* sc = app.add_subcommand("scenarios", "built-in scenarios");
  sc->require_subcommand(1);
  auto* ls = sc->add_subcommand("list", "list built-in scenarios");
  common(ls);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  for (CLI::App* sub : {sim, tr, ev, cmp, ls}) {
    if (sub->count("--seed")) opt.seed = seed;
  }
  if (tr->count("--iterations")) opt.iterations = iterations;

  if (*sim) return simulate(opt, out, err);
  if (*tr) return train(opt, out, err);
  if (*ev) return eval(opt, out, err);
  if (*cmp) return compare(opt, out, err);
  if (*ls) return list_scenarios(opt, out, err);
  return kConfigError;
}

}  // namespace helm::cli
