#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fidtrack {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageOrIo = 2;

/// Entry point behind the `fidtrack` binary. `args` excludes the program
/// name. Subcommands: simulate, filter, evaluate, report, bench.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fidtrack
