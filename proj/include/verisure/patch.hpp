// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "verisure/common.hpp"
#include "verisure/rtl_graph.hpp"
#include "verisure/sim_runner.hpp"

namespace verisure {

struct PatchOp {
    int block_id = 0;
    std::string replacement;
};

/// Failure signature σ = (stage, t_f, m). Ordering: pass > sim_fail >
/// compile_fail; within sim_fail larger t_f is better, then smaller m.
/// Absent fields order as t_f=0 and m=1 so the order stays total; defaulting
/// is surfaced through the degraded flag on PatchOutcome.
struct FailureSignature {
    SimStage stage = SimStage::CompileFail;
    std::optional<uint64_t> t_f;
    std::optional<int64_t> m;

    bool operator==(const FailureSignature&) const = default;
};

FailureSignature signature_of(const SimResult& result);

enum class SignatureOrder { Improved, Regressed, Unchanged };

std::string to_string(SignatureOrder order);

/// Strict total-order comparison of `after` against `before`.
SignatureOrder compare_signatures(const FailureSignature& before, const FailureSignature& after);

struct PatchOutcome {
    bool accepted = false;
    FailureSignature before;
    FailureSignature after;
    std::string rtl_after; // the version kept by the session
    SimResult sim;         // post-patch simulation evidence
    bool degraded_comparison = false; // a missing t_f/m was defaulted
};

/// Splices block replacements into `source` by byte span, bottom-up, leaving
/// every byte outside the targeted spans untouched.
/// Errors: LocalityViolation (op outside `sus`), UnknownBlock (stale or
/// unknown id), BadPatch (empty replacement or duplicate block ids).
Result<std::string> apply_patch(const std::string& source, const DependencyGraph& graph,
                                const std::vector<PatchOp>& ops, const SuspectSet& sus);

/// One RTL lineage under repair: current source, its graph and suspect set,
/// and the simulation recipe used to judge patches.
struct PatchSession {
    std::string source;
    DependencyGraph graph;
    SuspectSet suspects;
    FailureSignature signature;
    std::vector<std::string> seed_signals; // slice seeds on accept
    int d_max = 3;
    std::set<std::string> exclude_reads;

    SimBackend* backend = nullptr;
    SimJob job;           // rtl_files[0] is rewritten with the candidate source
    std::string rtl_path; // where candidate sources are materialized ("" skips writing)
};

/// Applies ops, re-simulates, and keeps the result only when the signature
/// strictly improves (or reaches pass); otherwise the session source is left
/// exactly as it was. Infrastructure faults come back as SessionError and
/// leave the session untouched.
Result<PatchOutcome> try_patch(PatchSession& session, const std::vector<PatchOp>& ops);

} // namespace verisure
