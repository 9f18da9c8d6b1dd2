#pragma once

#include <iosfwd>
#include <string>

namespace logicdec::cli {

enum ExitCode { kOk = 0, kUsage = 1, kRuntime = 2 };

/// Runs the logicdec command line. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Help text of the top-level command followed by every subcommand's.
std::string full_help();

}  // namespace logicdec::cli
