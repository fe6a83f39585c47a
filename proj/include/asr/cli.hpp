#pragma once

#include <string>
#include <vector>

namespace asr::cli {

// Exit codes: 0 success, 2 config error, 3 missing dependency artifact,
// 4 training divergence, 1 anything else.
constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_missing_artifact = 3;
constexpr int exit_diverged = 4;

// Dispatch `asr <subcommand> ...`; argv excludes the program name.
int run(const std::vector<std::string>& args);

} // namespace asr::cli
