#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pwmstab {

/// Exit codes shared by the CLI and scripted callers.
enum ExitCode : int {
    exit_ok = 0,
    exit_verify_failure = 1,
    exit_unstable = 2,
    exit_marginal = 3,
    exit_solver_failure = 4,
    exit_usage = 64,
};

/// Full command-line entry point (everything but process setup): parses
/// `analyze | sweep | simulate | verify` plus options, runs the command, and
/// returns the exit code. All output goes to the given streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace pwmstab
