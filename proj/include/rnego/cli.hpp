#pragma once

#include <string>
#include <vector>

namespace rnego {

/// Command-line driver. Subcommands: solve (offline tubes and bank), replay
/// (run safety modes over a logged interaction), suite (batch synth, replay,
/// and mode comparison), infer (role-belief trace for a log), slice (2D
/// export of a value function), synth (emit scenario logs). Returns the
/// process exit status; diagnostics go to stderr.
int cli_dispatch(int argc, const char* const* argv);

/// Same dispatch for tests: args exclude the program name.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace rnego
