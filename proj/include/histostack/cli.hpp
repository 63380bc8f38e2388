#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace histostack {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the histostack binary. args excludes the program name.
// Results go to `out`; diagnostics and logs go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace histostack
