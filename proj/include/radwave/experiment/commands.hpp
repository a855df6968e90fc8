#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "radwave/experiment/config.hpp"
#include "radwave/experiment/report.hpp"

namespace radwave::experiment {

struct CommandOptions {
  std::optional<std::string> out_dir;  // overrides output.directory
  int threads = 1;
  bool metadata = true;  // false strips the timestamp for bit-exact diffs
};

struct CommandOutcome {
  CommandReport report;
  std::vector<std::filesystem::path> files;
  int exit_code = 0;  // 0 all verdicts pass, 2 otherwise
};

CommandOutcome cmd_simulate(const ScenarioConfig& config, const CommandOptions& options);
CommandOutcome cmd_verify_flux(const ScenarioConfig& config, const CommandOptions& options);
CommandOutcome cmd_verify_morawetz(const ScenarioConfig& config, const CommandOptions& options);
CommandOutcome cmd_scattering(const ScenarioConfig& config, const CommandOptions& options);
CommandOutcome cmd_convergence(const ScenarioConfig& config, const CommandOptions& options);

const std::vector<std::string>& command_names();

// Loads the config, runs the named command and prints a verdict summary.
// Returns 0 on all-pass, 2 on a failed verdict, 1 on usage or config errors.
int run_command(const std::string& name, const std::string& config_path, const CommandOptions& options,
                std::ostream& out, std::ostream& err);

}  // namespace radwave::experiment
