#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fmci::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kIo = 2,
    kIncompatible = 3,
    kValidationFailed = 4,
};

// Runs the command line `args` (without the program name). Standard input
// is `in`; reports go to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace fmci::cli
