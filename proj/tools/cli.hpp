#pragma once

#include <string>
#include <vector>

namespace trustdyn::cli {

/// Command dispatch for the trustdyn tool. Returns the process exit code:
/// 0 success, 1 usage error, 2 data/validation error, 3 numerical error.
int run(int argc, const char* const* argv);

/// Test-friendly overload; args exclude the program name.
int run(const std::vector<std::string>& args);

}  // namespace trustdyn::cli
