#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace heavytail::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Full command-line entry point; args[0] is the program name. Results go to
/// `out`, one-line error records to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace heavytail::cli
