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

struct TraceWindow {
    uint64_t clock_period = 0; // 0 when the clock is degenerate (<2 active edges)
    std::vector<uint64_t> sample_times;
    /// Column order is the requested signal order; every value list has
    /// sample_times' length.
    std::vector<std::pair<std::string, std::vector<FourStateValue>>> signals;
    std::vector<std::string> elided;
    std::map<std::string, std::string> elided_values; // display form per elided name
    std::vector<Error> warnings;                      // NonUniformClock, SignalNotInVcd
};

struct AlignmentHint {
    std::map<int, int> scores; // δ ∈ {-2..+2} → mismatch count over in-range samples
    int best_delta = 0;
    bool significant = false;
};

struct FailingSignal {
    std::string name;
    std::string observed;
    std::string expected; // empty when unknown
};

struct SuspectRow {
    int id = 0;
    std::string kind;
    int start_line = 0;
    int end_line = 0;
};

struct TraceReport {
    std::optional<uint64_t> t_f;
    std::vector<FailingSignal> failing_signals;
    std::optional<AlignmentHint> alignment;
    std::optional<TraceWindow> window;
    SuspectSet suspects;
    std::vector<SuspectRow> suspect_rows;
    std::string expected_source; // "log", "vcd", or "" when no golden series was found
    std::string diagnostics;     // raw tool output, kept for degraded (no-VCD) reports
    std::vector<Error> warnings;
};

/// Earliest grid index where the two sampled rows differ; x/z compare unequal
/// to 0/1 and to each other. nullopt means the series agree everywhere
/// (no divergence).
std::optional<uint64_t> first_divergence(const std::vector<uint64_t>& times,
                                         const std::vector<std::vector<FourStateValue>>& observed,
                                         const std::vector<std::vector<FourStateValue>>& expected);

/// Samples the named signals at every active clock edge inside
/// [t_f - K*clock_period, t_f]. A clock with fewer than two active edges gets
/// clock_period 0, a whole-trace window and a NonUniformClock warning.
Result<TraceWindow> extract_window(const VcdDatabase& db, const ClockingSpec& clocking,
                                   uint64_t t_f, int k_cycles,
                                   const std::vector<std::string>& signals);

/// Tests cycle shifts δ ∈ {-2..+2}: score(δ) counts samples where
/// observed[i] != expected[i - δ], skipping out-of-range indices, so a series
/// observed one sample late scores 0 at δ=+1. Needs ≥4 samples, else nullopt.
/// Ties break toward smaller |δ|, then toward negative δ.
std::optional<AlignmentHint> alignment_check(const std::vector<FourStateValue>& observed,
                                             const std::vector<FourStateValue>& expected);

/// Human phrasing for an alignment hint, e.g.
/// "best alignment at δ=+1: output appears 1 cycle late".
std::string hint_text(const AlignmentHint& hint);

/// Assembles the full report from simulator logs plus an optional VCD. With
/// no VCD the report degrades to the parsed failure time and raw diagnostics.
/// The window is restricted to failing outputs, contract inputs, and the
/// reads/writes of suspect blocks.
TraceReport build_report(const VcdDatabase* db, const std::string& logs,
                         const DesignContract& contract, const DependencyGraph& graph,
                         const SuspectSet& suspects, int k_cycles = 8);

/// Deterministic text rendering with FAILURE, ALIGNMENT, TRACE, SUSPECTS
/// sections.
std::string render_report(const TraceReport& report);
Json report_to_json(const TraceReport& report);

} // namespace verisure
