#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tabsynth {

// Entry point of the command-line tool. `args` excludes the program name.
// The report goes to `out`; diagnostics and --trace lines go to `err`.
// Returns 0 for yes/open, 1 for no/closed, 2 for usage or input errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tabsynth
