#pragma once

#include <string>
#include <vector>

namespace nltraffic {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 2,        // unknown subcommand or flag, bad flag value
  exit_validation = 3,   // invalid scenario or schedule, broken model assumption
  exit_io = 4,           // unreadable scenario, unwritable output
  exit_solver = 5,       // CFL violation, non-finite values, missing history
  exit_unsupported = 6,  // adjoint or optimizer on an unsupported topology
  exit_internal = 70,
};

/// Runs one subcommand (simulate, avsim, sweep, optimize, gradcheck). args[0]
/// is the program name.
int run_command(const std::vector<std::string>& args);
int run_command(int argc, const char* const* argv);

}  // namespace nltraffic
