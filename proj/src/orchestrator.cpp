// SPDX-License-Identifier: Apache-2.0
#include "verisure/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <sstream>
#include <thread>

#include "verisure/formal.hpp"
#include "verisure/trace.hpp"
#include "verisure/util.hpp"
#include "verisure/vcd.hpp"

namespace fs = std::filesystem;

namespace verisure {

std::string to_string(SessionStatus s) {
    switch (s) {
    case SessionStatus::Running: return "running";
    case SessionStatus::Passed: return "passed";
    case SessionStatus::FailedBudget: return "failed_budget";
    case SessionStatus::FailedError: return "failed_error";
    }
    return "failed_error";
}

std::string to_string(SessionPhase p) {
    switch (p) {
    case SessionPhase::Contract: return "contract";
    case SessionPhase::Harness: return "harness";
    case SessionPhase::CodeGen: return "codegen";
    case SessionPhase::Simulate: return "simulate";
    case SessionPhase::Diagnose: return "diagnose";
    case SessionPhase::Patch: return "patch";
    case SessionPhase::Done: return "done";
    }
    return "done";
}

namespace {

// Extra architect completions allowed after a lint-dirty contract.
constexpr int kLintRePrompts = 2;
constexpr int kProofTimeoutSeconds = 60;

std::string session_scratch_dir() {
    static std::atomic<uint64_t> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    fs::path base = fs::temp_directory_path() /
                    ("verisure-run-" + std::to_string(stamp) + "-" +
                     std::to_string(counter.fetch_add(1)));
    std::error_code ec;
    fs::create_directories(base, ec);
    return base.string();
}

std::string describe(const Error& e) {
    std::string out = e.code + ": " + e.message;
    if (!e.path.empty()) out += " (" + e.path + ")";
    return out;
}

void fail_infra(SessionState& s, const Error& e) {
    s.status = SessionStatus::FailedError;
    s.phase = SessionPhase::Done;
    s.error_detail = describe(e);
}

void fail_budget(SessionState& s, const std::string& why) {
    s.status = SessionStatus::FailedBudget;
    s.phase = SessionPhase::Done;
    s.warnings.push_back(why);
}

void push_history(SessionState& s, const std::string& action, bool accepted) {
    s.history.push_back({s.iteration, s.signature, action, accepted});
}

void track_budget(SessionState& s, const std::string& role, const AgentTurn& turn) {
    if (turn.attempts > 1) s.budgets[role] += turn.attempts - 1;
}

// Content faults (malformed replies, bad patches) burn budget; these codes
// mean the machinery itself failed and the session cannot be judged.
bool infra_code(const std::string& code) {
    return code == "SessionError" || code == "ToolMissing" || code == "FixtureExhausted" ||
           code == "FixtureError" || code == "HttpError" || code == "Exhausted" ||
           code == "NoBackend" || code == "MissingTemplate";
}

std::string render_lint_errors(const LintReport& rep) {
    std::ostringstream os;
    for (const auto& i : rep.errors) os << i.code << " at " << i.path << ": " << i.message << "\n";
    return os.str();
}

std::set<std::string> slice_excludes(const DesignContract& c) {
    std::set<std::string> excl;
    if (c.clocking) {
        if (c.clocking->clock && c.clocking->clock->name) excl.insert(*c.clocking->clock->name);
        if (c.clocking->reset && c.clocking->reset->name) excl.insert(*c.clocking->reset->name);
    }
    return excl;
}

std::vector<std::string> output_names(const DesignContract& c) {
    std::vector<std::string> out;
    if (!c.io) return out;
    for (const auto& p : *c.io) {
        if (p.name && p.dir && *p.dir == "output") out.push_back(*p.name);
    }
    return out;
}

int line_count(const std::string& text) {
    int n = 1;
    for (char ch : text)
        if (ch == '\n') ++n;
    if (!text.empty() && text.back() == '\n') --n;
    return std::max(1, n);
}

std::string rtl_file_path(const SessionState& s) {
    return s.job.rtl_files.empty() ? std::string() : s.job.rtl_files[0];
}

void rebuild_graph(SessionState& s) {
    auto blocks = decompose(s.rtl);
    if (blocks.ok()) {
        s.graph = build_graph(blocks.take());
        s.degraded_locality = false;
    } else {
        s.graph = DependencyGraph{};
        s.degraded_locality = true;
        s.warnings.push_back("rtl does not decompose: " + describe(blocks.error()) +
                             "; repair degraded to whole-file replacement");
    }
}

// ---- phase transitions ----------------------------------------------------

void step_contract(SessionState& s, ModelBackend& model) {
    AgentContext ctx;
    ctx.task_prompt = s.problem.prompt;
    ctx.testbench = s.testbench;
    ctx.lint_errors = s.lint_feedback;
    auto turn = run_agent_turn(model, RoleId::Architect, ctx);
    if (!turn.ok()) return fail_infra(s, turn.error());
    track_budget(s, "architect", turn.value());
    if (turn.value().malformed) {
        push_history(s, "architect", false);
        return fail_budget(s, "architect reply stayed malformed: " + turn.value().malformed_reason);
    }

    auto parsed = parse_contract(turn.value().extracted.text);
    if (!parsed.ok()) {
        push_history(s, "architect", false);
        return fail_budget(s, "contract unparseable: " + describe(parsed.error()));
    }
    LintReport rep = lint(parsed.value());
    if (!rep.errors.empty()) {
        push_history(s, "architect", false);
        int& used = s.budgets["architect_lint"];
        ++used;
        if (used > kLintRePrompts) {
            return fail_budget(s, "contract lint never converged after " +
                                      std::to_string(kLintRePrompts) + " re-prompts");
        }
        s.lint_feedback = render_lint_errors(rep);
        return; // stay in Contract for another architect turn
    }
    for (const auto& w : rep.warnings) {
        s.warnings.push_back("lint " + w.code + " at " + w.path + ": " + w.message);
    }
    s.contract = rep.canonical ? *rep.canonical : parsed.take();
    s.contract_json = render_contract(s.contract);
    s.lint_feedback.clear();
    push_history(s, "architect", true);
    s.phase = SessionPhase::Harness;
}

void step_harness(SessionState& s, ModelBackend& model) {
    if (!s.testbench.empty()) {
        // Benchmark mode: the golden harness is the judge, the Verifier rests.
        push_history(s, "verifier_skipped", true);
        s.phase = SessionPhase::CodeGen;
        return;
    }
    AgentContext ctx;
    ctx.contract_json = s.contract_json;
    auto turn = run_agent_turn(model, RoleId::Verifier, ctx);
    if (!turn.ok()) return fail_infra(s, turn.error());
    track_budget(s, "verifier", turn.value());
    if (turn.value().malformed) {
        push_history(s, "verifier", false);
        return fail_budget(s, "verifier reply stayed malformed: " + turn.value().malformed_reason);
    }
    s.testbench = turn.value().extracted.text;
    push_history(s, "verifier", true);
    s.phase = SessionPhase::CodeGen;
}

void step_codegen(SessionState& s, ModelBackend& model) {
    AgentContext ctx;
    ctx.contract_json = s.contract_json;
    auto turn = run_agent_turn(model, RoleId::Coder, ctx);
    if (!turn.ok()) return fail_infra(s, turn.error());
    track_budget(s, "coder", turn.value());
    if (turn.value().malformed) {
        push_history(s, "coder", false);
        return fail_budget(s, "coder reply stayed malformed: " + turn.value().malformed_reason);
    }
    s.rtl = turn.value().extracted.text;
    rebuild_graph(s);

    fs::path work(s.work_dir);
    std::string rtl_path = (work / "rtl.sv").string();
    std::string tb_path = (work / "tb.sv").string();
    if (!write_file(rtl_path, s.rtl) || !write_file(tb_path, s.testbench)) {
        return fail_infra(s, make_error("SessionError", "cannot materialize sources", s.work_dir));
    }
    s.job.rtl_files = {rtl_path};
    s.job.testbench_files = {tb_path};
    s.job.top = s.problem.top;
    s.job.success_regex = s.problem.success_regex;
    s.job.dump_vcd = true;
    s.job.work_dir = (work / "sim").string();

    push_history(s, "coder", true);
    s.phase = SessionPhase::Simulate;
}

void adopt_sim(SessionState& s, SimResult result, const std::string& action) {
    s.last_sim = std::move(result);
    s.signature = signature_of(s.last_sim);
    s.ever_compiled = s.ever_compiled || s.last_sim.stage != SimStage::CompileFail;
    if (s.last_sim.stage == SimStage::Pass) {
        push_history(s, action, true);
        s.status = SessionStatus::Passed;
        s.phase = SessionPhase::Done;
    } else {
        push_history(s, action, false);
        s.phase = SessionPhase::Diagnose;
    }
}

void step_simulate(SessionState& s, SimBackend& sim) {
    auto result = sim.run(s.job);
    if (!result.ok()) return fail_infra(s, result.error());
    adopt_sim(s, result.take(), "simulate");
}

void append_formal_hints(SessionState& s, SimBackend& sim) {
    std::ostringstream hints;
    ObligationSet obl = derive_obligations(s.contract, s.graph);

    // Violations from the judging log first (scripted fixtures land here).
    std::vector<AssertionViolation> viols = parse_violations(s.last_sim.diagnostics);

    // External mode gets a dedicated assertion run: checkers stay advisory,
    // so they are bound in a side simulation, never in the judging job.
    if (s.config.sim_backend == "external" && !s.assertions_broken) {
        auto emission = emit_assertions(s.contract, obl);
        if (emission.ok()) {
            fs::path work(s.work_dir);
            std::string checker = (work / "checker.sv").string();
            std::string binder = (work / "bind.sv").string();
            if (write_file(checker, emission.value().checker_source) &&
                write_file(binder, emission.value().bind_source)) {
                SimJob aj = s.job;
                aj.extra_files = {checker, binder};
                aj.dump_vcd = false;
                aj.work_dir = (work / "assert").string();
                auto run = sim.run(aj);
                if (run.ok() && run.value().stage != SimStage::CompileFail) {
                    auto extra = parse_violations(run.value().diagnostics);
                    viols.insert(viols.end(), extra.begin(), extra.end());
                } else {
                    s.assertions_broken = true;
                    s.warnings.push_back("assertion checkers disabled: side run failed to compile");
                }
            }
        }
        // NoClock (purely combinational contract) simply leaves no checkers.
    }

    for (const auto& v : viols) {
        hints << "assertion " << v.name << " fired at t=" << v.time;
        if (!v.implicated.empty()) {
            hints << " (";
            for (size_t i = 0; i < v.implicated.size(); ++i) {
                if (i) hints << ", ";
                hints << v.implicated[i].first << "=" << v.implicated[i].second;
            }
            hints << ")";
        }
        hints << "\n";
    }

    // Equivalence proof: expensive, so once per distinct RTL version, and only
    // where external tools are in play.
    auto targets = comb_targets(obl);
    if (!targets.empty() && s.config.sim_backend == "external") {
        size_t h = std::hash<std::string>{}(s.rtl);
        if (!s.proved_rtl.count(h)) {
            s.proved_rtl.insert(h);
            auto spec = synthesize_spec(s.contract, targets);
            if (spec.ok()) {
                auto miter = build_miter(s.contract, s.rtl, spec.value(), targets);
                if (miter.ok()) {
                    ProofResult pr = run_proof(miter.value(), kProofTimeoutSeconds,
                                               (fs::path(s.work_dir) / "proof").string());
                    hints << "miter proof (";
                    for (size_t i = 0; i < targets.size(); ++i) {
                        if (i) hints << ", ";
                        hints << targets[i];
                    }
                    hints << "): ";
                    switch (pr.status) {
                    case ProofStatus::Proven:
                        hints << "combinational outputs proven equivalent to the contract rules";
                        break;
                    case ProofStatus::Counterexample: {
                        hints << "counterexample at";
                        for (const auto& [name, value] : pr.witness) {
                            hints << " " << name << "=" << value.display();
                        }
                        break;
                    }
                    case ProofStatus::Inconclusive: hints << "inconclusive"; break;
                    case ProofStatus::ToolError: hints << "prover unavailable"; break;
                    }
                    hints << "\n";
                } else {
                    s.warnings.push_back("miter skipped: " + describe(miter.error()));
                }
            } else {
                s.warnings.push_back("spec synthesis skipped: " + describe(spec.error()));
            }
        }
    }

    s.formal_hints = hints.str();
}

void step_diagnose(SessionState& s, SimBackend& sim) {
    LogFindings findings = parse_log(s.last_sim.diagnostics, s.job.success_regex);
    std::vector<std::string> seeds;
    for (const auto& m : findings.mismatches) {
        if (!m.has_details || m.signal.empty()) continue;
        if (std::find(seeds.begin(), seeds.end(), m.signal) == seeds.end()) {
            seeds.push_back(m.signal);
        }
    }
    if (seeds.empty()) seeds = output_names(s.contract);

    if (!s.graph.blocks.empty()) {
        s.suspects = backward_slice(s.graph, seeds, s.config.d_max, slice_excludes(s.contract));
        if (s.suspects.block_ids.empty()) {
            // No driver matched a failing name. A hard stop would burn the
            // budget on a harness naming mismatch, so widen to every block.
            s.degraded_locality = true;
            s.warnings.push_back("empty slice: locality relaxed to all blocks");
            s.suspects.line_ranges.clear();
            for (const auto& b : s.graph.blocks) {
                s.suspects.block_ids.push_back(b.id);
                s.suspects.line_ranges.push_back({b.start_line, b.end_line});
            }
        } else {
            s.degraded_locality = false;
        }
    } else {
        s.degraded_locality = true;
        s.suspects = SuspectSet{};
        s.suspects.seed_signals = seeds;
    }

    std::optional<VcdDatabase> db;
    if (s.last_sim.vcd_path) {
        if (auto raw = read_file(*s.last_sim.vcd_path)) {
            auto parsed = parse_vcd(*raw);
            if (parsed.ok()) {
                db = parsed.take();
            } else {
                s.warnings.push_back("vcd unreadable: " + describe(parsed.error()));
            }
        }
    }
    TraceReport rep = build_report(db ? &*db : nullptr, s.last_sim.diagnostics, s.contract,
                                   s.graph, s.suspects, s.config.window_k);
    s.trace_text = render_report(rep);

    s.formal_hints.clear();
    if (s.config.formal_enabled) append_formal_hints(s, sim);

    push_history(s, "diagnose", true);
    s.phase = SessionPhase::Patch;
}

// Fallback for RTL our decomposer cannot parse: the whole file is one block
// and a patch is a full rewrite, judged by the same signature rule.
void wholesale_patch(SessionState& s, SimBackend& sim, const std::vector<PatchOp>& edits) {
    const std::string candidate = edits.front().replacement;
    std::string path = rtl_file_path(s);
    if (path.empty() || !write_file(path, candidate)) {
        return fail_infra(s, make_error("SessionError", "cannot materialize candidate RTL", path));
    }
    auto run = sim.run(s.job);
    if (!run.ok()) return fail_infra(s, run.error());

    FailureSignature after = signature_of(run.value());
    SignatureOrder order = compare_signatures(s.signature, after);
    if (run.value().stage == SimStage::Pass || order == SignatureOrder::Improved) {
        s.rtl = candidate;
        rebuild_graph(s);
        s.patch_note.clear();
        adopt_sim(s, run.take(), "patch_accepted");
    } else {
        write_file(path, s.rtl);
        push_history(s, "patch_rejected", false);
        s.patch_note = "previous full-file rewrite was rejected: failure signature " +
                       to_string(order);
    }
}

void step_patch(SessionState& s, ModelBackend& model, SimBackend& sim) {
    if (s.iteration >= s.max_iterations) {
        push_history(s, "budget_exhausted", false);
        return fail_budget(s, "iteration budget exhausted at " + std::to_string(s.iteration));
    }

    AgentContext ctx;
    ctx.contract_json = s.contract_json;
    ctx.trace_report = s.trace_text;
    if (!s.patch_note.empty()) {
        ctx.trace_report += "\nPREVIOUS ATTEMPT\n" + s.patch_note + "\n";
    }
    ctx.formal_hints = s.formal_hints;

    std::vector<int> editable;
    if (s.graph.blocks.empty()) {
        ctx.suspects.push_back({0, "file", 1, line_count(s.rtl), s.rtl});
        editable = {0};
    } else {
        for (int id : s.suspects.block_ids) {
            const RtlBlock* b = s.graph.block_by_id(id);
            if (!b) continue;
            ctx.suspects.push_back({b->id, to_string(b->kind), b->start_line, b->end_line, b->text});
            editable.push_back(b->id);
        }
    }

    auto turn = run_agent_turn(model, RoleId::Debugger, ctx, {}, editable);
    if (!turn.ok()) return fail_infra(s, turn.error());
    track_budget(s, "debugger", turn.value());
    ++s.iteration; // every debugger turn is one repair attempt

    if (turn.value().malformed) {
        push_history(s, "debugger_malformed", false);
        s.patch_note = "previous reply was malformed: " + turn.value().malformed_reason;
        return; // stay in Patch; the budget check gates the loop
    }
    if (turn.value().extracted.unchanged) {
        push_history(s, "debugger_unchanged", false);
        s.patch_note = "previous turn declined to edit; pick a suspect block and fix it";
        return;
    }

    if (s.graph.blocks.empty()) {
        return wholesale_patch(s, sim, turn.value().extracted.edits);
    }

    PatchSession ps;
    ps.source = s.rtl;
    ps.graph = s.graph;
    ps.suspects = s.suspects;
    ps.signature = s.signature;
    ps.seed_signals = s.suspects.seed_signals;
    ps.d_max = s.config.d_max;
    ps.exclude_reads = slice_excludes(s.contract);
    ps.backend = &sim;
    ps.job = s.job;
    ps.rtl_path = rtl_file_path(s);

    auto out = try_patch(ps, turn.value().extracted.edits);
    if (!out.ok()) {
        if (infra_code(out.error().code)) return fail_infra(s, out.error());
        push_history(s, "patch_invalid", false);
        s.patch_note = "previous patch was invalid: " + describe(out.error());
        return;
    }
    if (out.value().degraded_comparison) {
        s.warnings.push_back("signature comparison defaulted a missing field");
    }
    if (out.value().accepted) {
        s.rtl = out.value().rtl_after;
        s.graph = ps.graph;
        s.suspects = ps.suspects;
        s.patch_note.clear();
        adopt_sim(s, std::move(out.value().sim), "patch_accepted");
    } else {
        push_history(s, "patch_rejected", false);
        s.patch_note = "previous patch was rejected: failure signature " +
                       to_string(compare_signatures(out.value().before, out.value().after));
    }
}

} // namespace

SessionState make_session(const ProblemManifest& problem, const GlobalConfig& config) {
    SessionState s;
    s.problem = problem;
    s.config = config;
    s.max_iterations = config.max_iterations;
    s.work_dir = session_scratch_dir();
    if (!problem.testbench_path.empty()) {
        auto tb = read_file(problem.testbench_path);
        if (!tb) {
            fail_infra(s, make_error("SessionError", "cannot read golden testbench",
                                     problem.testbench_path));
        } else {
            s.testbench = *tb;
        }
    }
    return s;
}

void step(SessionState& s, ModelBackend& model, SimBackend& sim) {
    if (s.status != SessionStatus::Running) return;
    switch (s.phase) {
    case SessionPhase::Contract: return step_contract(s, model);
    case SessionPhase::Harness: return step_harness(s, model);
    case SessionPhase::CodeGen: return step_codegen(s, model);
    case SessionPhase::Simulate: return step_simulate(s, sim);
    case SessionPhase::Diagnose: return step_diagnose(s, sim);
    case SessionPhase::Patch: return step_patch(s, model, sim);
    case SessionPhase::Done: return;
    }
}

SessionReport finish_session(const SessionState& state, double wall_time_seconds) {
    SessionReport r;
    r.status = state.status == SessionStatus::Running ? SessionStatus::FailedError : state.status;
    r.functional_pass = state.status == SessionStatus::Passed;
    r.syntax_pass = state.ever_compiled;
    r.iterations_used = state.iteration;
    r.artifacts.contract_json = state.contract_json;
    r.artifacts.rtl = state.rtl;
    r.artifacts.testbench = state.testbench;
    r.artifacts.trace_report = state.trace_text;
    r.artifacts.formal_hints = state.formal_hints;
    r.history = state.history;
    r.warnings = state.warnings;
    r.error_detail = state.error_detail;
    r.wall_time_seconds = wall_time_seconds;
    return r;
}

SessionReport run_session(const ProblemManifest& problem, ModelBackend& model, SimBackend& sim,
                          const GlobalConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    SessionState s = make_session(problem, config);
    // Every Patch step consumes an iteration and Contract is lint-bounded, so
    // the walk terminates; the cap is a backstop against regressions.
    int guard = 0;
    while (s.status == SessionStatus::Running && guard < 100000) {
        step(s, model, sim);
        ++guard;
    }
    if (s.status == SessionStatus::Running) {
        fail_infra(s, make_error("SessionError", "state machine did not terminate"));
    }
    std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    return finish_session(s, dt.count());
}

namespace {

Json signature_to_json(const FailureSignature& sig) {
    Json j = Json::object();
    j["stage"] = to_string(sig.stage);
    j["t_f"] = sig.t_f ? Json(*sig.t_f) : Json(nullptr);
    j["m"] = sig.m ? Json(*sig.m) : Json(nullptr);
    return j;
}

} // namespace

Json session_report_to_json(const SessionReport& report, bool with_timings) {
    Json j = Json::object();
    j["status"] = to_string(report.status);
    j["syntax_pass"] = report.syntax_pass;
    j["functional_pass"] = report.functional_pass;
    j["iterations_used"] = report.iterations_used;
    Json hist = Json::array();
    for (const auto& h : report.history) {
        Json e = Json::object();
        e["iteration"] = h.iteration;
        e["action"] = h.action;
        e["accepted"] = h.accepted;
        e["signature"] = signature_to_json(h.signature);
        hist.push_back(std::move(e));
    }
    j["history"] = std::move(hist);
    j["warnings"] = report.warnings;
    if (!report.error_detail.empty()) j["error"] = report.error_detail;
    Json a = Json::object();
    a["contract"] = report.artifacts.contract_json;
    a["rtl"] = report.artifacts.rtl;
    a["testbench"] = report.artifacts.testbench;
    a["trace_report"] = report.artifacts.trace_report;
    a["formal_hints"] = report.artifacts.formal_hints;
    j["artifacts"] = std::move(a);
    if (with_timings) j["wall_time_seconds"] = report.wall_time_seconds;
    return j;
}

Result<ProblemManifest> load_problem(const std::string& dir) {
    ProblemManifest m;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        return make_error("ManifestError", "not a directory", dir);
    }
    m.id = fs::path(dir).filename().string();
    m.dir = dir;
    auto prompt = read_file((fs::path(dir) / "prompt.txt").string());
    if (!prompt) return make_error("ManifestError", "missing prompt.txt", dir);
    m.prompt = *prompt;

    fs::path tb = fs::path(dir) / "testbench.sv";
    if (fs::exists(tb, ec)) m.testbench_path = tb.string();
    if (auto stub = read_file((fs::path(dir) / "stub.sv").string())) m.interface_stub = *stub;

    fs::path meta_path = fs::path(dir) / "meta.json";
    if (fs::exists(meta_path, ec)) {
        auto raw = read_file(meta_path.string());
        Json meta = raw ? Json::parse(*raw, nullptr, false) : Json(nullptr);
        if (!raw || meta.is_discarded() || !meta.is_object()) {
            m.warnings.push_back(make_error("ManifestError", "unreadable meta.json", m.id));
        } else {
            if (meta.contains("difficulty") && meta["difficulty"].is_string()) {
                if (auto d = parse_difficulty(meta["difficulty"].get<std::string>())) {
                    DifficultyLabel label;
                    label.label = *d;
                    m.difficulty = label;
                }
            }
            if (meta.contains("success_regex") && meta["success_regex"].is_string()) {
                m.success_regex = meta["success_regex"].get<std::string>();
            }
            if (meta.contains("top") && meta["top"].is_string()) {
                m.top = meta["top"].get<std::string>();
            }
        }
    }
    return m;
}

BackendFactory default_backend_factory(const GlobalConfig& config) {
    return [config](const ProblemManifest& p) -> Result<SessionBackends> {
        SessionBackends b;
        if (config.sim_backend == "scripted") {
            std::error_code ec;
            std::string fixture = (fs::path(p.dir) / "sim.json").string();
            if (p.dir.empty() || !fs::exists(fixture, ec)) fixture = config.sim_fixture;
            if (fixture.empty()) {
                return make_error("BadConfig",
                                  "scripted simulator needs <problem>/sim.json or sim.fixture",
                                  p.id);
            }
            auto sim = load_scripted_backend(fixture);
            if (!sim.ok()) return sim.error();
            b.sim = sim.take();
        } else {
            b.sim = make_external_backend();
        }

        std::error_code ec;
        std::string llm_dir = (fs::path(p.dir) / "llm").string();
        if (!p.dir.empty() && fs::is_directory(llm_dir, ec)) {
            auto responses = load_scripted_responses(llm_dir);
            if (!responses.ok()) return responses.error();
            b.model = make_scripted_backend(responses.take());
        } else if (!config.llm.base_url.empty()) {
            b.model = make_http_backend(config.llm.base_url, config.llm.api_key, config.llm.model);
        } else {
            return make_error("NoBackend",
                              "no model backend: provide <problem>/llm fixtures or llm.base_url",
                              p.id);
        }
        return b;
    };
}

BenchReport run_benchmark(const std::string& manifest_dir, const BackendFactory& factory,
                          const GlobalConfig& config, int jobs) {
    ManifestLoad load = load_manifests(manifest_dir);
    BenchReport report;

    std::vector<BenchProblemOutcome> outcomes(load.manifests.size());
    const size_t n = load.manifests.size();
    int workers = std::clamp(jobs, 1, static_cast<int>(std::max<size_t>(1, n)));
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n) return;
            const ProblemManifest& m = load.manifests[i];
            BenchProblemOutcome& o = outcomes[i];
            o.id = m.id;
            o.difficulty = m.difficulty ? to_string(m.difficulty->label) : "unlabeled";
            auto backends = factory(m);
            if (!backends.ok()) {
                o.report.status = SessionStatus::FailedError;
                o.report.error_detail = describe(backends.error());
                continue;
            }
            o.report = run_session(m, *backends.value().model, *backends.value().sim, config);
        }
    };
    if (workers <= 1 || n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    report.problems = std::move(outcomes);
    // Problems that never produced a manifest still count: they failed.
    for (const auto& e : load.errors) {
        BenchProblemOutcome o;
        o.id = e.path.empty() ? "(unknown)" : e.path;
        o.difficulty = "unlabeled";
        o.report.status = SessionStatus::FailedError;
        o.report.error_detail = describe(e);
        report.problems.push_back(std::move(o));
    }
    std::sort(report.problems.begin(), report.problems.end(),
              [](const BenchProblemOutcome& a, const BenchProblemOutcome& b) {
                  return a.id < b.id;
              });

    report.total = static_cast<int>(report.problems.size());
    for (const auto& o : report.problems) {
        DifficultyCounts& d = report.per_difficulty[o.difficulty];
        ++d.total;
        if (o.report.syntax_pass) {
            ++report.syntax_passes;
            ++d.syntax_passes;
        }
        if (o.report.functional_pass) {
            ++report.functional_passes;
            ++d.functional_passes;
        }
    }
    return report;
}

Json bench_report_to_json(const BenchReport& report, bool with_timings) {
    Json j = Json::object();
    Json problems = Json::array();
    for (const auto& o : report.problems) {
        Json p = Json::object();
        p["id"] = o.id;
        p["difficulty"] = o.difficulty;
        p["status"] = to_string(o.report.status);
        p["syntax_pass"] = o.report.syntax_pass;
        p["functional_pass"] = o.report.functional_pass;
        p["iterations_used"] = o.report.iterations_used;
        if (!o.report.error_detail.empty()) p["error"] = o.report.error_detail;
        if (with_timings) p["wall_time_seconds"] = o.report.wall_time_seconds;
        problems.push_back(std::move(p));
    }
    j["problems"] = std::move(problems);

    Json agg = Json::object();
    agg["total"] = report.total;
    auto rate = [&](int passes) {
        return report.total > 0 ? static_cast<double>(passes) / report.total : 0.0;
    };
    agg["syntax"] = Json{{"passes", report.syntax_passes}, {"pass_at_1", rate(report.syntax_passes)}};
    agg["functional"] =
        Json{{"passes", report.functional_passes}, {"pass_at_1", rate(report.functional_passes)}};
    Json per = Json::object();
    for (const auto& [label, d] : report.per_difficulty) {
        Json row = Json::object();
        row["total"] = d.total;
        row["syntax_passes"] = d.syntax_passes;
        row["functional_passes"] = d.functional_passes;
        row["syntax_pass_at_1"] = d.total > 0 ? static_cast<double>(d.syntax_passes) / d.total : 0.0;
        row["functional_pass_at_1"] =
            d.total > 0 ? static_cast<double>(d.functional_passes) / d.total : 0.0;
        per[label] = std::move(row);
    }
    agg["per_difficulty"] = std::move(per);
    j["aggregate"] = std::move(agg);
    return j;
}

} // namespace verisure
