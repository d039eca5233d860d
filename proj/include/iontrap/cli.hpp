#pragma once

// command-line front end: compile, run, scan, rb, bell, qpt.  every
// command prints one json report to `out` (and mirrors it, plus a csv
// trace, to files when an output basename is set).  reports embed the
// config hash and seed, so a report alone identifies its run exactly

#include <iosfwd>
#include <string>
#include <vector>

namespace iontrap {

// run the tool on the given arguments (program name excluded).  returns
// the process exit code: 0 success, 2 malformed input (circuit, config,
// or flags), 3 numerical failure
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iontrap
