#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thermoid {

/// Runs one command line (without the program name). Diagnostics go to
/// `err` as a single "error: <kind>: <message>" line; returns the exit status.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermoid
