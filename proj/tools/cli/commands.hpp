#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace helm::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRunFailed = 2, kTrainingFailed = 3 };

struct Options {
  std::string config_path;  ///< empty = built-in defaults
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string checkpoint;
  std::string scenario;     ///< "all" runs every built-in scenario (simulate)
  std::optional<int> iterations;
  std::string controller = "pd";
  std::string controller_a = "ppo";
  std::string controller_b = "pd";
  int episodes = 0;  ///< eval episode count, 0 = ppo.selection_episodes
};

int simulate(const Options& opt, std::ostream& out, std::ostream& err);
int train(const Options& opt, std::ostream& out, std::ostream& err);
int eval(const Options& opt, std::ostream& out, std::ostream& err);
int compare(const Options& opt, std::ostream& out, std::ostream& err);
int list_scenarios(const Options& opt, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace helm::cli
