// SPDX-License-Identifier: Apache-2.0
#include "verisure/patch.hpp"

#include <algorithm>

#include "verisure/util.hpp"

namespace verisure {

FailureSignature signature_of(const SimResult& result) {
    FailureSignature sig;
    sig.stage = result.stage;
    if (result.stage == SimStage::SimFail) {
        sig.t_f = result.first_failure_time;
        sig.m = result.mismatch_count;
    }
    return sig;
}

std::string to_string(SignatureOrder order) {
    switch (order) {
    case SignatureOrder::Improved: return "improved";
    case SignatureOrder::Regressed: return "regressed";
    case SignatureOrder::Unchanged: return "unchanged";
    }
    return "unchanged";
}

namespace {

int stage_rank(SimStage stage) {
    switch (stage) {
    case SimStage::Pass: return 2;
    case SimStage::SimFail: return 1;
    case SimStage::CompileFail: return 0;
    }
    return 0;
}

bool signature_defaulted(const FailureSignature& sig) {
    return sig.stage == SimStage::SimFail && (!sig.t_f || !sig.m);
}

} // namespace

SignatureOrder compare_signatures(const FailureSignature& before, const FailureSignature& after) {
    int rb = stage_rank(before.stage);
    int ra = stage_rank(after.stage);
    if (ra != rb) return ra > rb ? SignatureOrder::Improved : SignatureOrder::Regressed;
    if (after.stage != SimStage::SimFail) return SignatureOrder::Unchanged;
    uint64_t tb = before.t_f.value_or(0);
    uint64_t ta = after.t_f.value_or(0);
    if (ta != tb) return ta > tb ? SignatureOrder::Improved : SignatureOrder::Regressed;
    int64_t mb = before.m.value_or(1);
    int64_t ma = after.m.value_or(1);
    if (ma != mb) return ma < mb ? SignatureOrder::Improved : SignatureOrder::Regressed;
    return SignatureOrder::Unchanged;
}

Result<std::string> apply_patch(const std::string& source, const DependencyGraph& graph,
                                const std::vector<PatchOp>& ops, const SuspectSet& sus) {
    std::set<int> seen;
    std::vector<const RtlBlock*> targets;
    for (const auto& op : ops) {
        if (op.replacement.empty()) {
            return make_error("BadPatch", "empty replacement for block " +
                                              std::to_string(op.block_id));
        }
        if (!seen.insert(op.block_id).second) {
            return make_error("BadPatch",
                              "block " + std::to_string(op.block_id) + " targeted twice");
        }
        const RtlBlock* block = graph.block_by_id(op.block_id);
        if (!block) {
            return make_error("UnknownBlock", "no block with id " + std::to_string(op.block_id));
        }
        if (std::find(sus.block_ids.begin(), sus.block_ids.end(), op.block_id) ==
            sus.block_ids.end()) {
            return make_error("LocalityViolation",
                              "block " + std::to_string(op.block_id) +
                                  " is outside the suspect set",
                              "block " + std::to_string(op.block_id));
        }
        if (block->end_offset > source.size() ||
            source.compare(block->start_offset, block->end_offset - block->start_offset,
                           block->text) != 0) {
            return make_error("UnknownBlock",
                              "block " + std::to_string(op.block_id) +
                                  " does not match the current source (stale id)");
        }
        targets.push_back(block);
    }

    // Bottom-up splice keeps earlier offsets valid.
    std::vector<size_t> order(ops.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return targets[a]->start_offset > targets[b]->start_offset;
    });

    std::string patched = source;
    for (size_t idx : order) {
        const RtlBlock* block = targets[idx];
        patched.replace(block->start_offset, block->end_offset - block->start_offset,
                        ops[idx].replacement);
    }
    return patched;
}

Result<PatchOutcome> try_patch(PatchSession& session, const std::vector<PatchOp>& ops) {
    PatchOutcome outcome;
    outcome.before = session.signature;

    auto patched = apply_patch(session.source, session.graph, ops, session.suspects);
    if (!patched.ok()) return patched.error();
    const std::string& candidate = patched.value();

    if (!session.rtl_path.empty()) {
        if (!write_file(session.rtl_path, candidate)) {
            return make_error("SessionError", "cannot write candidate RTL", session.rtl_path);
        }
        if (session.job.rtl_files.empty()) {
            session.job.rtl_files.push_back(session.rtl_path);
        } else {
            session.job.rtl_files[0] = session.rtl_path;
        }
    }
    if (!session.backend) {
        return make_error("SessionError", "patch session has no simulator backend");
    }
    auto sim = session.backend->run(session.job);
    if (!sim.ok()) {
        // Infra faults must not look like a judged patch; surface them as
        // session errors so the caller retries without burning budget.
        return make_error("SessionError",
                          sim.error().code + ": " + sim.error().message, sim.error().path);
    }

    outcome.sim = sim.take();
    outcome.after = signature_of(outcome.sim);
    outcome.degraded_comparison =
        signature_defaulted(outcome.before) || signature_defaulted(outcome.after);
    SignatureOrder order = compare_signatures(outcome.before, outcome.after);
    outcome.accepted = order == SignatureOrder::Improved || outcome.after.stage == SimStage::Pass;

    if (outcome.accepted) {
        session.source = candidate;
        session.signature = outcome.after;
        auto reparsed = decompose(candidate);
        if (reparsed.ok()) {
            session.graph = build_graph(reparsed.take());
            session.suspects = backward_slice(session.graph, session.seed_signals, session.d_max,
                                              session.exclude_reads);
        } else {
            session.suspects.warnings.push_back(
                make_error("StaleGraph", "accepted source no longer parses in-repo; "
                                         "graph kept from previous version"));
        }
    } else if (!session.rtl_path.empty()) {
        // Roll the materialized file back so disk always mirrors the lineage.
        write_file(session.rtl_path, session.source);
    }
    outcome.rtl_after = session.source;
    return outcome;
}

} // namespace verisure
