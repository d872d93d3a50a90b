#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tauleap {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitIo = 3 };

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace tauleap
