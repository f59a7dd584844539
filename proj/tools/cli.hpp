#pragma once

#include <string>
#include <vector>

namespace imdsec::cli {

/// Entry point shared by the binary and the CLI tests; argv-style arguments
/// without the program name. Returns the process exit code: 0 on success /
/// expected verdicts, 1 on scenario deviation, 2 on configuration errors.
int run_cli(const std::vector<std::string>& args, std::string& output);

}  // namespace imdsec::cli
