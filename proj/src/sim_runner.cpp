// SPDX-License-Identifier: Apache-2.0
#include "verisure/sim_runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <regex>

#include "verisure/proc.hpp"
#include "verisure/util.hpp"

namespace fs = std::filesystem;

namespace verisure {

std::string to_string(SimStage stage) {
    switch (stage) {
    case SimStage::CompileFail: return "compile_fail";
    case SimStage::SimFail: return "sim_fail";
    case SimStage::Pass: return "pass";
    }
    return "compile_fail";
}

namespace {

const std::regex kMismatchRe(R"(Mismatch at time (\d+))");
const std::regex kMismatchDetailRe(
    R"(Mismatch at time (\d+): (\w+) expected=(\S+) observed=(\S+))");
const std::regex kFirstMismatchRe(R"(First mismatch occurred at time (\d+))");
const std::regex kTotalRe(R"(Total mismatched samples is (\d+))");
const std::regex kViolationRe(R"(ASSERT_VIOLATION\s+name=\S+\s+time=(\d+))");
const char* kDefaultSuccess = R"(ALL TESTS PASSED|TESTS? PASSED|All tests passed)";

void note_failure(LogFindings& out, uint64_t t) {
    if (!out.first_failure_time || t < *out.first_failure_time) out.first_failure_time = t;
}

} // namespace

LogFindings parse_log(const std::string& text, const std::string& success_regex) {
    LogFindings out;
    std::regex success_re(success_regex.empty() ? kDefaultSuccess : success_regex);
    for (const auto& line_view : split_lines(text)) {
        std::string line(line_view);
        std::smatch m;
        if (std::regex_search(line, m, kViolationRe)) {
            out.violation_lines.push_back(trim(line));
            note_failure(out, std::stoull(m[1].str()));
            continue;
        }
        if (std::regex_search(line, m, kMismatchDetailRe)) {
            MismatchLine entry;
            entry.time = std::stoull(m[1].str());
            entry.signal = m[2].str();
            entry.expected = m[3].str();
            entry.observed = m[4].str();
            entry.has_details = true;
            note_failure(out, entry.time);
            out.mismatches.push_back(std::move(entry));
            continue;
        }
        if (std::regex_search(line, m, kMismatchRe)) {
            MismatchLine entry;
            entry.time = std::stoull(m[1].str());
            note_failure(out, entry.time);
            out.mismatches.push_back(std::move(entry));
            continue;
        }
        if (std::regex_search(line, m, kFirstMismatchRe)) {
            note_failure(out, std::stoull(m[1].str()));
            continue;
        }
        if (std::regex_search(line, m, kTotalRe)) {
            out.total_mismatches = static_cast<int64_t>(std::stoll(m[1].str()));
            continue;
        }
        if (std::regex_search(line, success_re)) {
            out.success_marker = true;
        }
    }
    return out;
}

SimResult classify_sim(const std::string& sim_output, int sim_exit, bool timed_out,
                       const std::string& success_regex) {
    SimResult result;
    result.diagnostics = sim_output;
    if (timed_out) {
        result.stage = SimStage::SimFail;
        result.diagnostics += "\n[simulation timed out]";
        return result;
    }
    LogFindings f = parse_log(sim_output, success_regex);
    bool failed = !f.violation_lines.empty() || !f.mismatches.empty() ||
                  (f.total_mismatches && *f.total_mismatches > 0);
    if (failed) {
        result.stage = SimStage::SimFail;
        result.first_failure_time = f.first_failure_time;
        if (f.total_mismatches && *f.total_mismatches > 0) {
            result.mismatch_count = f.total_mismatches;
        } else {
            int64_t n = static_cast<int64_t>(f.mismatches.size() + f.violation_lines.size());
            result.mismatch_count = n > 0 ? n : 1;
        }
        return result;
    }
    if (f.success_marker || (f.total_mismatches && *f.total_mismatches == 0) || sim_exit == 0) {
        result.stage = SimStage::Pass;
        if (f.success_marker || f.total_mismatches) result.mismatch_count = 0;
        return result;
    }
    // Unrecognized log with nonzero exit: a failure with unknown shape.
    result.stage = SimStage::SimFail;
    result.mismatch_count = 1;
    return result;
}

namespace {

std::string fresh_scratch_dir() {
    static std::atomic<uint64_t> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    fs::path base = fs::temp_directory_path() /
                    ("verisure-sim-" + std::to_string(stamp) + "-" +
                     std::to_string(counter.fetch_add(1)));
    fs::create_directories(base);
    return base.string();
}

class ExternalBackend final : public SimBackend {
public:
    std::string name() const override { return "external"; }

    Result<SimResult> run(const SimJob& job) override {
        auto started = std::chrono::steady_clock::now();
        std::string entry = "verilator";
        if (const char* env = std::getenv("VERISURE_SIM_BIN"); env && *env) entry = env;
        if (!command_exists(entry)) {
            return make_error("ToolMissing", "simulator entry point not found: " + entry, entry);
        }
        std::string scratch = job.work_dir.empty() ? fresh_scratch_dir() : job.work_dir;
        fs::create_directories(scratch);
        std::string obj_dir = (fs::path(scratch) / "obj_dir").string();

        std::vector<std::string> compile_cmd = {
            entry,          "--binary", "--timing", "-Wno-fatal", "-Wno-lint", "-Wno-style",
            "--quiet-exit", "--Mdir",   obj_dir,    "--top-module", job.top};
        if (job.dump_vcd) compile_cmd.push_back("-DVERISURE_DUMP_VCD");
        for (const auto& f : job.rtl_files) compile_cmd.push_back(fs::absolute(f).string());
        for (const auto& f : job.testbench_files) compile_cmd.push_back(fs::absolute(f).string());
        for (const auto& f : job.extra_files) compile_cmd.push_back(fs::absolute(f).string());

        auto compile = run_process(compile_cmd, scratch, job.timeout_seconds);
        if (!compile.ok()) return compile.error();
        SimResult result;
        if (compile.value().timed_out || compile.value().exit_code != 0) {
            result.stage = SimStage::CompileFail;
            result.diagnostics = compile.value().output;
            if (compile.value().timed_out) result.diagnostics += "\n[compilation timed out]";
            result.wall_time = elapsed_since(started);
            return result;
        }

        std::string sim_bin = (fs::path(obj_dir) / ("V" + job.top)).string();
        if (!fs::exists(sim_bin)) {
            result.stage = SimStage::CompileFail;
            result.diagnostics =
                compile.value().output + "\n[simulator binary not produced: " + sim_bin + "]";
            result.wall_time = elapsed_since(started);
            return result;
        }
        auto sim = run_process({sim_bin}, scratch, job.timeout_seconds);
        if (!sim.ok()) return sim.error();
        result = classify_sim(sim.value().output, sim.value().exit_code, sim.value().timed_out,
                              job.success_regex);
        fs::path vcd = fs::path(scratch) / "dump.vcd";
        if (result.stage != SimStage::CompileFail && fs::exists(vcd)) {
            result.vcd_path = vcd.string();
        }
        result.wall_time = elapsed_since(started);
        return result;
    }

private:
    static double elapsed_since(std::chrono::steady_clock::time_point start) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

class ScriptedBackend final : public SimBackend {
public:
    ScriptedBackend(std::vector<Json> runs, bool repeat_last, std::string base_dir)
        : runs_(std::move(runs)), repeat_last_(repeat_last), base_dir_(std::move(base_dir)) {}

    std::string name() const override { return "scripted"; }

    Result<SimResult> run(const SimJob& job) override {
        if (next_ >= runs_.size()) {
            if (!repeat_last_ || runs_.empty()) {
                return make_error("FixtureExhausted",
                                  "scripted simulator has no run #" + std::to_string(next_));
            }
            next_ = runs_.size() - 1;
        }
        const Json& entry = runs_[next_++];
        SimResult result;
        int compile_exit = entry.value("compile_exit", 0);
        if (compile_exit != 0) {
            result.stage = SimStage::CompileFail;
            result.diagnostics = entry.value("compile_output", std::string());
            return result;
        }
        std::string sim_output = entry.value("sim_output", std::string());
        int sim_exit = entry.value("sim_exit", 0);
        bool timed_out = entry.value("timed_out", false);
        result = classify_sim(sim_output, sim_exit, timed_out, job.success_regex);
        std::string compile_output = entry.value("compile_output", std::string());
        if (!compile_output.empty()) {
            result.diagnostics = compile_output + "\n" + result.diagnostics;
        }
        if (entry.contains("vcd") && result.stage != SimStage::CompileFail) {
            fs::path p(entry["vcd"].get<std::string>());
            if (p.is_relative() && !base_dir_.empty()) p = fs::path(base_dir_) / p;
            result.vcd_path = p.string();
        }
        return result;
    }

private:
    std::vector<Json> runs_;
    bool repeat_last_ = false;
    std::string base_dir_;
    size_t next_ = 0;
};

} // namespace

std::unique_ptr<SimBackend> make_external_backend() { return std::make_unique<ExternalBackend>(); }

Result<std::unique_ptr<SimBackend>> make_scripted_backend(const Json& fixture,
                                                          const std::string& base_dir) {
    if (!fixture.is_object() || !fixture.contains("runs") || !fixture["runs"].is_array()) {
        return make_error("FixtureError", "scripted simulator fixture needs a 'runs' array",
                          "runs");
    }
    std::vector<Json> runs;
    for (const auto& entry : fixture["runs"]) {
        if (!entry.is_object()) {
            return make_error("FixtureError", "fixture run entries must be objects", "runs");
        }
        runs.push_back(entry);
    }
    bool repeat_last = fixture.value("repeat_last", false);
    return std::unique_ptr<SimBackend>(
        new ScriptedBackend(std::move(runs), repeat_last, base_dir));
}

Result<std::unique_ptr<SimBackend>> load_scripted_backend(const std::string& fixture_path) {
    auto raw = read_file(fixture_path);
    if (!raw) {
        return make_error("FixtureError", "cannot read fixture file", fixture_path);
    }
    Json parsed = Json::parse(*raw, nullptr, false);
    if (parsed.is_discarded()) {
        return make_error("FixtureError", "fixture is not valid JSON", fixture_path);
    }
    return make_scripted_backend(parsed, fs::path(fixture_path).parent_path().string());
}

} // namespace verisure
