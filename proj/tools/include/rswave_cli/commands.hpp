#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "rswave_cli/config.hpp"

namespace rswave::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitGeometry = 2,
    kExitCondition = 3,
    kExitDegenerate = 4,
    kExitStagnation = 5,
};

struct CommandOutcome {
    int code = kExitOk;
    std::vector<std::string> files;  ///< CSV files written, in order
};

const std::vector<std::string>& command_names();

/// Loads the config, runs the command and maps library errors to exit codes.
/// Diagnostics go to `log`; tables go to CSV files under output.dir.
CommandOutcome run_command(const std::string& command, const std::string& config_path,
                           std::ostream& log);
CommandOutcome run_command(const std::string& command, const RawConfig& raw, std::ostream& log);

}  // namespace rswave::cli
