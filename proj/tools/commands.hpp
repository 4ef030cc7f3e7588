#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace varorder::cli {

enum ExitCode : int { kSuccess = 0, kValidation = 1, kNumerical = 2, kAcceptance = 3 };

/// Names accepted by run_command, in help order.
const std::vector<std::string>& command_names();

/// Runs one command, writing CSV artifacts into `out_dir` and a short report to `log`.
/// Validation problems throw ConfigError; numerical failures propagate as library errors.
int run_command(const std::string& command, const ExperimentConfig& config, const std::filesystem::path& out_dir,
                std::ostream& log);

}  // namespace varorder::cli
