#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qfusion {

/// Runs one subcommand (gen-dataset, train, sample, eval, export). `args`
/// excludes the program name. `--config FILE` supplies `key=value` lines
/// named after the subcommand's long flags; flags on the command line win.
/// Returns 0 on success, 1 on runtime errors and 2 on usage errors; errors
/// are a single JSON line on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfusion
