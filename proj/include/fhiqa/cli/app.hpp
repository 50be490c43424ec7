#pragma once

#include <string>
#include <vector>

namespace fhiqa::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitSplit = 2,
    kExitNumeric = 3,
    kExitCheckpoint = 4,
};

// Entry point of the fhiqa command; args[0] is the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace fhiqa::cli
