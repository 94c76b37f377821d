#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace harmrec::cli {

/// Runs one invocation. args excludes the program name. Returns the exit
/// status: 0 on success, 1 on any error or violated tolerance.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace harmrec::cli
