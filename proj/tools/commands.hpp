#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace sim {

inline constexpr const char* kVersion = "0.1.0";

struct RunContext {
  RunConfig config;
  std::filesystem::path out_dir;
  std::ostream* log = nullptr;  ///< progress and summaries
};

/// Names accepted by run_command.
const std::vector<std::string>& command_names();

/// Runs one subcommand. Returns the process exit status for conditions that are not
/// exceptions (validate reports uncertified legs as 3); errors propagate as
/// ConfigError, emzi::SamplingViolation, emzi::NumericError / DomainError or IoError.
int run_command(const std::string& name, const RunContext& ctx);

/// Maps an in-flight exception to the documented exit status and prints it.
int exit_status_for_current_exception(std::ostream& err);

}  // namespace sim
