// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "verisure/common.hpp"
#include "verisure/contract.hpp" // Json

namespace verisure {

enum class SimStage { CompileFail, SimFail, Pass };

std::string to_string(SimStage stage);

struct SimResult {
    SimStage stage = SimStage::CompileFail;
    std::optional<uint64_t> first_failure_time;
    std::optional<int64_t> mismatch_count;
    std::string diagnostics;
    std::optional<std::string> vcd_path;
    double wall_time = 0.0;
};

struct SimJob {
    std::vector<std::string> rtl_files;
    std::vector<std::string> testbench_files;
    std::vector<std::string> extra_files;
    std::string top;
    int timeout_seconds = 60;
    bool dump_vcd = false;
    std::string work_dir;      // scratch directory; created when empty
    std::string success_regex; // harness pass marker override (per-manifest)
};

/// One structured mismatch event from a harness log. `has_details` is true
/// only when the line carried signal/expected/observed fields.
struct MismatchLine {
    uint64_t time = 0;
    std::string signal;
    std::string expected;
    std::string observed;
    bool has_details = false;
};

struct LogFindings {
    std::optional<uint64_t> first_failure_time;
    std::optional<int64_t> total_mismatches; // from an explicit total line
    std::vector<MismatchLine> mismatches;
    std::vector<std::string> violation_lines; // ASSERT_VIOLATION lines, verbatim
    bool success_marker = false;
};

/// Pure log scan. Recognizes, in priority order: assertion-violation lines,
/// mismatch lines with timestamps, explicit mismatch totals, pass markers.
/// first_failure_time is the minimum over all recognized failure timestamps.
LogFindings parse_log(const std::string& text, const std::string& success_regex = "");

class SimBackend {
public:
    virtual ~SimBackend() = default;
    /// Compile + simulate. Timeout is reported as a sim_fail result, not an
    /// error; errors are reserved for infrastructure faults (ToolMissing,
    /// FixtureExhausted, FixtureError).
    virtual Result<SimResult> run(const SimJob& job) = 0;
    virtual std::string name() const = 0;
};

/// Spawns the simulator toolchain (verilator --binary flow by default;
/// VERISURE_SIM_BIN overrides the entry point) and executes the produced
/// binary.
std::unique_ptr<SimBackend> make_external_backend();

/// Replays canned compile/sim transcripts from a fixture:
///   {"runs":[{"compile_exit":0,"compile_output":"","sim_exit":1,
///             "sim_output":"...","vcd":"relative/path.vcd"}],
///    "repeat_last":false}
/// Paths are resolved relative to base_dir.
Result<std::unique_ptr<SimBackend>> make_scripted_backend(const Json& fixture,
                                                          const std::string& base_dir);
Result<std::unique_ptr<SimBackend>> load_scripted_backend(const std::string& fixture_path);

/// Shared verdict logic: folds a simulation transcript into a SimResult so
/// external and scripted backends classify identically.
SimResult classify_sim(const std::string& sim_output, int sim_exit, bool timed_out,
                       const std::string& success_regex);

} // namespace verisure
