#pragma once

#include <string>
#include <vector>

namespace erl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInvariant = 3;

// args[0] is the program name. Never throws; returns the process exit code.
int cli_main(const std::vector<std::string>& args);

}  // namespace erl::cli
