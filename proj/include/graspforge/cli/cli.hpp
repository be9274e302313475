#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace graspforge
{

/// Exit codes shared by every subcommand.
enum ExitCode : int
{
  exit_ok = 0,
  exit_error = 1,  // bad flags, unreadable or invalid input, plugin errors
  exit_empty = 2,  // valid run with nothing to report: no candidates, failing expectation, unknown key
};

/// Runs `graspforge <args...>`; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace graspforge
