#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "degenbeam/errors.hpp"

int main(int argc, char** argv) {
  using namespace degenbeam::app;
  CLI::App app{"Numerical laboratory for degenerate Euler-Bernoulli beams"};
  std::string command, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "command to run")
      ->required()
      ->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "run config (JSON)")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--seed", seed, "overrides the config seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const degenbeam::Error& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  }
  if (seed) config.seed = *seed;
  int status = run_command(command, config, out_dir, std::cerr);
  std::cout << command << ": " << (status == kOk ? "ok" : "status " + std::to_string(status)) << " (report in "
            << out_dir << "/report.json)\n";
  return status;
}
