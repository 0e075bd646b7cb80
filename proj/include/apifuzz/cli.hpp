#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace apifuzz {

/// Runs the command line. `args` excludes the program name. Exit codes:
/// 0 success, 1 findings (validate warnings, replay failures), 2
/// configuration errors (bad flags, unreadable inputs), 3 fatal environment
/// errors (unreachable target, failed login).
int cli_run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace apifuzz
