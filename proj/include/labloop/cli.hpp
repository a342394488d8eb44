#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace labloop {

// Runs the labloop command line with `args` (program name excluded).
// Returns 0 on success, 1 on a module error, 2 on a usage error.
int cli_run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace labloop
