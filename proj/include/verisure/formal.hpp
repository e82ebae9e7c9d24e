// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "verisure/common.hpp"
#include "verisure/contract.hpp"
#include "verisure/rtl_graph.hpp"
#include "verisure/vcd.hpp"

namespace verisure {

enum class ObligationKind { Seq, Comb };

struct Obligation {
    std::string id;
    ObligationKind kind = ObligationKind::Comb;
    std::vector<std::string> targets;
    std::string source_rule; // contract rule id or "builtin:<template>"

    bool operator==(const Obligation&) const = default;
};

struct ObligationSet {
    std::vector<Obligation> obligations;
    std::vector<Error> notes; // DemotedToSeq and friends
};

/// Splits contract rules into combinational proof obligations and sequential
/// checking obligations. Comb targets must have latency 0 and a driver cone
/// free of stateful blocks (always_ff, edge-triggered always, latches,
/// instances); zero-latency outputs with stateful cones are demoted to seq
/// with a DemotedToSeq note. Builtin seq templates: edge-stability for every
/// latency>=1 output, reset-value for rules shaped like
/// `<reset> -> <output> == <const>`.
ObligationSet derive_obligations(const DesignContract& c, const DependencyGraph& g);

/// Combinational output names eligible for equivalence proving.
std::vector<std::string> comb_targets(const ObligationSet& set);

/// Compiles the functional summary into a synthesizable spec module computing
/// each target from the DUT inputs. Boolean rules become assigns, conditional
/// rules become always_comb. Errors: UnsupportedRule (unknown identifier,
/// missing or ambiguous rule for a target, non-combinational construct).
Result<std::string> synthesize_spec(const DesignContract& c,
                                    const std::vector<std::string>& targets);

struct MiterBundle {
    std::string dut_source;
    std::string spec_source;
    std::string miter_source;
    std::string sby_config;
    std::vector<std::string> inputs;
    std::vector<std::string> targets;
    std::string dut_module;
    std::string spec_module;
};

/// Wraps DUT and spec with tied inputs and a per-target case-equality
/// assertion. Errors: PortMismatch listing the divergent ports.
Result<MiterBundle> build_miter(const DesignContract& c, const std::string& dut_source,
                                const std::string& spec_source,
                                const std::vector<std::string>& targets);

enum class ProofStatus { Proven, Counterexample, Inconclusive, ToolError };

std::string to_string(ProofStatus s);

struct ProofResult {
    ProofStatus status = ProofStatus::ToolError;
    std::map<std::string, FourStateValue> witness; // populated iff Counterexample
    std::string raw_log;
};

/// Drives the external prover over the bundle in work_dir (a temp directory
/// when empty). A missing tool or crashed run is ToolError; a timeout is
/// Inconclusive. Neither ever aborts a session: formal evidence is advisory.
ProofResult run_proof(const MiterBundle& bundle, int timeout_seconds,
                      const std::string& work_dir = "");

/// Folds a prover log into a status (PASS -> proven, FAIL -> counterexample,
/// timeout markers -> inconclusive).
ProofStatus parse_proof_log(const std::string& text);

/// Pulls the earliest assignment of each named input out of a counterexample
/// trace.
std::map<std::string, FourStateValue> extract_witness(const VcdDatabase& db,
                                                      const std::vector<std::string>& inputs);

struct AssertionEmission {
    std::string checker_source;
    std::string bind_source;
    std::string checker_module;
    std::vector<std::string> notes; // delegated obligations, skipped templates
};

/// Emits one checker module sampling on the contract clock plus a bind file
/// attaching it to the DUT. Templates: edge-stability (inactive-edge sampled
/// previous value, reset guard, case equality) and reset-value. Errors:
/// NoClock for purely combinational contracts.
Result<AssertionEmission> emit_assertions(const DesignContract& c,
                                          const ObligationSet& obligations);

struct AssertionViolation {
    std::string name;
    uint64_t time = 0;
    std::vector<std::pair<std::string, std::string>> implicated;
    std::string message;

    bool operator==(const AssertionViolation&) const = default;
};

/// Extracts ASSERT_VIOLATION lines, sorted by time (stable). Malformed
/// violation lines are skipped with a warning when `warnings` is given.
std::vector<AssertionViolation> parse_violations(const std::string& sim_log,
                                                 std::vector<Error>* warnings = nullptr);

} // namespace verisure
