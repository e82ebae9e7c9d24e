// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "verisure/common.hpp"

namespace verisure {

struct ProcResult {
    int exit_code = 0;
    bool timed_out = false;
    std::string output; // stdout and stderr interleaved
};

/// Runs argv as a child process, capturing combined output. Kills the child
/// after timeout_seconds. Returns a ToolMissing error when argv[0] cannot be
/// resolved to an executable.
Result<ProcResult> run_process(const std::vector<std::string>& argv, const std::string& cwd,
                               int timeout_seconds);

bool command_exists(const std::string& name);

} // namespace verisure
