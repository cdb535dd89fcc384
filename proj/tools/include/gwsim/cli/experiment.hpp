#pragma once

#include <string>

#include "gwsim/cli/scenario.hpp"

namespace gwsim::cli {

/// Runs the scenario and renders its report in the configured format.
/// Output depends only on the config, never on the thread count.
std::string run_experiment(const ScenarioConfig& config);

/// Analytic criterion next to the empirical extinction fraction.
std::string compare_experiment(const ScenarioConfig& config);

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfigError = 2,
  kExitNumericFailure = 3,
  kExitPopulationOverflow = 4,
};

/// Maps an error kind (Error::kind()) to its exit code.
int exit_code_for(const std::string& kind);

}  // namespace gwsim::cli
