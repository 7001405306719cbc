#pragma once

#include <string>
#include <vector>

// Command-line front end. Subcommands: validate, profile, simulate, sweep,
// fit, verify. Exit codes: 0 success, 1 input error, 2 numerical
// non-convergence, 3 invariant-check failure.

namespace floqamp {

int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // without program name

}  // namespace floqamp
