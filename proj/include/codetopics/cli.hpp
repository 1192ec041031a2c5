#pragma once

#include <string>
#include <vector>

namespace codetopics {

// Runs one CLI invocation; args exclude the program name. Errors are reported
// as a JSON record on stderr and a nonzero exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace codetopics
