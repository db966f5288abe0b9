#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace degenbeam::app {

enum ExitStatus : int {
  kOk = 0,
  kChecksFailed = 1,
  kConfigError = 2,
  kOutOfScope = 3,
  kRuntimeError = 4,
};

const std::vector<std::string>& command_names();

// Runs one command and writes report.json plus CSV traces into out_dir.
// Errors are reported on err and mapped to an exit status.
int run_command(const std::string& command, const RunConfig& config, const std::string& out_dir,
                std::ostream& err);

}  // namespace degenbeam::app
