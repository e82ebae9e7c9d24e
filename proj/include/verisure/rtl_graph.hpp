// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "verisure/common.hpp"
#include "verisure/contract.hpp"
#include "verisure/verilog.hpp"

namespace verisure {

enum class BlockKind {
    AlwaysFf,
    AlwaysComb,
    AlwaysLatch,
    AlwaysGeneric,
    ContinuousAssign,
    ModuleInstance,
};

std::string to_string(BlockKind k);

struct EdgeEvent {
    bool posedge = true;
    std::string signal;

    bool operator==(const EdgeEvent&) const = default;
};

/// One semantic unit of RTL. Line span is 1-based inclusive; the byte span
/// [start_offset, end_offset) covers exactly `text` within the source.
struct RtlBlock {
    int id = 0;
    BlockKind kind = BlockKind::AlwaysGeneric;
    int start_line = 0;
    int end_line = 0;
    size_t start_offset = 0;
    size_t end_offset = 0;
    std::string text;
    std::set<std::string> reads;
    std::set<std::string> writes;
    std::vector<EdgeEvent> edge_events;
    int case_count = 0;

    bool edge_triggered() const { return !edge_events.empty(); }
};

struct ModulePort {
    std::string name;
    PortDir dir = PortDir::Input;
};

struct ModuleDecl {
    std::string name;
    std::vector<ModulePort> ports;
    int start_line = 0;
    int end_line = 0;
};

/// File-level facts the decomposer gathers beyond the block list. Widths come
/// from range declarations; parametric ranges are folded with parameter
/// defaults where possible, else scored as 32 with `width_warning` set.
struct RtlFile {
    std::vector<RtlBlock> blocks;
    std::vector<ModuleDecl> modules;
    std::map<std::string, int64_t> parameters;
    int64_t max_declared_width = 0;
    bool width_warning = false;
};

struct DependencyGraph {
    std::vector<RtlBlock> blocks;
    std::map<std::string, std::set<int>> driver_map;
    std::set<std::pair<int, int>> edges;

    const RtlBlock* block_by_id(int id) const {
        return id >= 0 && id < static_cast<int>(blocks.size()) ? &blocks[id] : nullptr;
    }
};

struct SuspectSet {
    std::vector<std::string> seed_signals;
    std::vector<int> block_ids;
    std::vector<std::pair<int, int>> line_ranges;
    int depth_used = 0;
    std::vector<Error> warnings;
};

Result<RtlFile> analyze_rtl(const std::string& source);
Result<std::vector<RtlBlock>> decompose(const std::string& source);
DependencyGraph build_graph(std::vector<RtlBlock> blocks);

/// Bounded backward closure over the driver map. `exclude_reads` removes
/// identifiers (contract clock/reset) from traversal so slices do not fan out
/// through clock wiring; seeds themselves are never excluded.
SuspectSet backward_slice(const DependencyGraph& g, const std::vector<std::string>& fail,
                          int d_max, const std::set<std::string>& exclude_reads = {});

} // namespace verisure
