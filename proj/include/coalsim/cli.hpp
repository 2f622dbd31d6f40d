#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coalsim {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // numeric or regime error
inline constexpr int kExitUsage = 2;
inline constexpr int kExitVerdictFail = 3;

/// Runs the `coalsim` command line on args (without the program name).
/// Primary output goes to `out` unless --output names a file; errors are
/// written to `err` as one JSON object.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coalsim
