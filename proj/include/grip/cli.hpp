#pragma once

#include <string>
#include <vector>

namespace grip::cli {

// Runs one subcommand (simulate / ingest / summary / anova / profile).
// Exit codes: 0 ok, 1 I/O failure, 2 invalid data or flags, 3 degenerate
// statistics.
int run(int argc, const char* const* argv);

// Same, from an argument list without the program name.
int run(const std::vector<std::string>& args);

}  // namespace grip::cli
