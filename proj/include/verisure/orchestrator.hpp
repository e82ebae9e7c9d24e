// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "verisure/agents.hpp"
#include "verisure/bench.hpp"
#include "verisure/config.hpp"
#include "verisure/contract.hpp"
#include "verisure/patch.hpp"
#include "verisure/rtl_graph.hpp"
#include "verisure/sim_runner.hpp"

namespace verisure {

enum class SessionStatus { Running, Passed, FailedBudget, FailedError };
enum class SessionPhase { Contract, Harness, CodeGen, Simulate, Diagnose, Patch, Done };

std::string to_string(SessionStatus s);
std::string to_string(SessionPhase p);

struct HistoryEntry {
    int iteration = 0;
    FailureSignature signature;
    std::string action;
    bool accepted = false;
};

/// One design-under-repair state machine. `iteration` counts debugger patch
/// attempts only; contract, harness and codegen turns do not consume it.
struct SessionState {
    ProblemManifest problem;
    GlobalConfig config;
    SessionStatus status = SessionStatus::Running;
    SessionPhase phase = SessionPhase::Contract;

    DesignContract contract;
    std::string contract_json;
    std::string rtl;
    std::string testbench;
    int iteration = 0;
    int max_iterations = 10;
    std::vector<HistoryEntry> history;
    std::map<std::string, int> budgets; // extra completions consumed, per role

    DependencyGraph graph;
    SuspectSet suspects;
    bool degraded_locality = false; // empty slice or unparseable RTL
    FailureSignature signature;
    SimResult last_sim;
    std::string trace_text;
    std::string formal_hints;
    std::string lint_feedback;      // rendered lint errors for the re-prompt
    std::string patch_note;         // feedback on the previous rejected attempt
    std::set<size_t> proved_rtl;    // RTL hashes already taken through the miter
    bool assertions_broken = false; // checker compile failed once; stop retrying
    bool ever_compiled = false;
    std::vector<std::string> warnings;
    std::string error_detail; // populated for failed_error

    std::string work_dir;
    SimJob job; // judging recipe; never carries assertion checkers
};

struct SessionArtifacts {
    std::string contract_json;
    std::string rtl;
    std::string testbench;
    std::string trace_report;
    std::string formal_hints;
};

struct SessionReport {
    SessionStatus status = SessionStatus::FailedError;
    bool syntax_pass = false;
    bool functional_pass = false; // implies syntax_pass
    int iterations_used = 0;
    SessionArtifacts artifacts;
    std::vector<HistoryEntry> history;
    std::vector<std::string> warnings;
    std::string error_detail;
    double wall_time_seconds = 0.0;
};

SessionState make_session(const ProblemManifest& problem, const GlobalConfig& config);

/// Advances one phase transition, appending at least one history entry.
/// Requires status == Running; anything else is a no-op.
void step(SessionState& state, ModelBackend& model, SimBackend& sim);

/// Runs the session to completion: contract, harness, code, then the
/// simulate / diagnose / patch loop under the iteration cap. Infrastructure
/// faults (missing tool, exhausted fixture, unreadable testbench) end as
/// failed_error; model-content faults end as failed_budget at worst.
SessionReport run_session(const ProblemManifest& problem, ModelBackend& model, SimBackend& sim,
                          const GlobalConfig& config);

SessionReport finish_session(const SessionState& state, double wall_time_seconds);

/// `with_timings` adds wall-clock fields; replay comparisons leave it off.
Json session_report_to_json(const SessionReport& report, bool with_timings = false);

/// Loads a single problem directory (prompt.txt required; testbench.sv
/// optional, its absence selects generative mode where the Verifier writes
/// the harness). meta.json is honored as in the benchmark loader.
Result<ProblemManifest> load_problem(const std::string& dir);

struct SessionBackends {
    std::unique_ptr<ModelBackend> model;
    std::unique_ptr<SimBackend> sim;
};

using BackendFactory = std::function<Result<SessionBackends>(const ProblemManifest&)>;

/// Builds per-problem backends from the config. Scripted simulator fixtures
/// resolve to <problem>/sim.json, falling back to config.sim_fixture;
/// scripted model responses to <problem>/llm/*.txt. Without a fixture
/// directory the model comes from config.llm (NoBackend when unset).
BackendFactory default_backend_factory(const GlobalConfig& config);

struct BenchProblemOutcome {
    std::string id;
    std::string difficulty; // "Easy" | "Medium" | "Hard" | "unlabeled"
    SessionReport report;
};

struct DifficultyCounts {
    int total = 0;
    int syntax_passes = 0;
    int functional_passes = 0;
};

struct BenchReport {
    std::vector<BenchProblemOutcome> problems; // manifest order (sorted by id)
    int total = 0;
    int syntax_passes = 0;
    int functional_passes = 0;
    std::map<std::string, DifficultyCounts> per_difficulty;
};

/// Runs every problem under `manifest_dir` independently with at most `jobs`
/// sessions in flight. A problem that cannot be loaded or backed ends as
/// failed_error in place; the sweep itself never aborts.
BenchReport run_benchmark(const std::string& manifest_dir, const BackendFactory& factory,
                          const GlobalConfig& config, int jobs);

Json bench_report_to_json(const BenchReport& report, bool with_timings = false);

} // namespace verisure
