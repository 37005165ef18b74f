#pragma once

#include <string>
#include <vector>

namespace tlcp {

// Parses and executes one command; args excludes the program name.
// Returns the process exit status: 0 success, 1 usage error, 2 data error.
// Diagnostics go to the error stream; TLCP_LOG ∈ {0,1,2} sets verbosity
// (0 silent, 1 warnings — the default, 2 adds progress notes).
int dispatch(const std::vector<std::string>& args);

}  // namespace tlcp
