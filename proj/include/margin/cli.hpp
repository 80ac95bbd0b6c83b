#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace margin::cli {

/// Runs the command line `args` (args[0] is the program name).
/// Returns 0 on success, 1 on data or validation errors and 2 on usage
/// errors. Messages go to `err`, help text to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace margin::cli
