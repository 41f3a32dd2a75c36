#pragma once

#include <string>
#include <vector>

namespace trapan {

// Exit codes: 0 success, 1 usage/config error, 2 data/format error,
// 3 numerical failure (non-finite loss).
int run_command(int argc, const char* const* argv);

/// Convenience for in-process invocation; args exclude the program name.
int run_command(const std::vector<std::string>& args);

}  // namespace trapan
