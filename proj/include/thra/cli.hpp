#pragma once

#include <string>
#include <vector>

namespace thra {

// Runs the command-line tool on argv-style arguments (program name omitted).
// Returns the process exit code: 0 clean, 1 input or usage error, 2 analysis
// completed but found loopholes / no feasible plan.
int run_cli(std::vector<std::string> args);

}  // namespace thra
