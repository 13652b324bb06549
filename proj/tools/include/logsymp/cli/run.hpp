#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logsymp/cli/report.hpp"
#include "logsymp/cli/scenario.hpp"

namespace logsymp::cli {

const std::vector<std::string>& command_names();

/// Name of the tolerance that --tol overrides for a command.
std::string primary_tolerance(const std::string& command);

/// Runs one command. Input errors (Parse, Catalog) propagate as Error; any
/// other library error is recorded in Report::error.
Report run(const std::string& command, const Scenario& scenario, int threads = 1);

/// 0 when every check passes, 1 otherwise.
int exit_code(const Report& report);

/// Writes <dir>/<command>.txt, <dir>/<command>.json and the CSV files.
void write_report(const Report& report, const std::string& dir);

}  // namespace logsymp::cli
