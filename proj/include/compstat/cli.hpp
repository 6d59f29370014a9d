#pragma once

#include <iosfwd>

namespace compstat::cli {

/// Full command-line front end: parses argv, runs the subcommand, writes the
/// report to `out` (or --out) and machine-readable errors to `err`.
/// Returns the process exit code: 0 done, 2 done with REJECT_H0, 1 error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace compstat::cli
