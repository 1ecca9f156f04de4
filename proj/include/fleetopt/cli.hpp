#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fleetopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // infeasible instance, failed validation, bad input file
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Results that have
/// no -o target go to `out`; diagnostics and usage text go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace fleetopt::cli
