#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "radwave/experiment/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Radial defocusing wave experiments"};
  app.require_subcommand(1);
  std::string config;
  std::string out_dir;
  int threads = 1;
  bool no_metadata = false;

  for (const auto& name : radwave::experiment::command_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " command");
    sub->add_option("--config", config, "scenario config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory, overrides output.directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--seed-metadata-off", no_metadata, "omit the timestamp from reports");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  radwave::experiment::CommandOptions options;
  if (!out_dir.empty()) options.out_dir = out_dir;
  options.threads = threads;
  options.metadata = !no_metadata;
  const std::string name = app.get_subcommands().front()->get_name();
  return radwave::experiment::run_command(name, config, options, std::cout, std::cerr);
}
