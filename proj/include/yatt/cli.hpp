#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace yatt {

/// Dispatches one CLI invocation (argv without the program name). All output
/// goes through the given streams so tests can drive commands in-process.
/// Exit codes: 0 success, 1 usage/config, 2 data/io, 3 numeric failure.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace yatt
