#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridzones::cli {

enum ExitCode : int {
    ok = 0,
    usage_error = 1,      // bad flags, config, input files or network data
    infeasible = 2,       // infeasibility-dominated run
};

/// Runs one invocation; `args` excludes the program name. Machine output goes
/// to `out`, usage and error text to `err`, logs to standard error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridzones::cli
