// SPDX-License-Identifier: Apache-2.0
// Random-instance generators shared by unit and acceptance tests.
#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "verisure/rtl_graph.hpp"

namespace testgen {

inline int rand_int(std::mt19937& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool coin(std::mt19937& rng, double p = 0.5) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

/// A random contract JSON that lints clean (defaults may fire as warnings).
inline std::string random_contract_json(std::mt19937& rng) {
    int n_out = rand_int(rng, 1, 4);
    int n_in = rand_int(rng, 1, 4);
    bool sequential = coin(rng, 0.5);
    bool explicit_clocking = sequential ? coin(rng, 0.6) : coin(rng, 0.2);
    bool has_clk_port = sequential || explicit_clocking || coin(rng, 0.3);
    bool has_rst = has_clk_port && coin(rng, 0.5);

    std::string io = "[";
    auto add_port = [&](const std::string& name, const char* dir, int width) {
        if (io.size() > 1) io += ",";
        io += "{\"name\":\"" + name + "\",\"dir\":\"" + dir + "\"";
        if (width > 0) io += ",\"width\":" + std::to_string(width);
        if (!coin(rng, 0.3)) io += ",\"description\":\"sig " + name + "\"";
        io += "}";
    };
    if (has_clk_port) add_port("clk", "input", coin(rng) ? 1 : 0);
    if (has_rst) add_port("rst", "input", 1);
    for (int i = 0; i < n_in; i++)
        add_port("in" + std::to_string(i), "input", coin(rng) ? rand_int(rng, 1, 64) : 0);
    for (int i = 0; i < n_out; i++)
        add_port("out" + std::to_string(i), "output", coin(rng) ? rand_int(rng, 1, 64) : 0);
    if (coin(rng, 0.2)) add_port("io0", "inout", 1);
    io += "]";

    std::string timing = "{\"outputs\":{";
    bool first = true;
    bool any_latency = false;
    for (int i = 0; i < n_out; i++) {
        if (coin(rng, 0.7)) {
            if (!first) timing += ",";
            first = false;
            int lat = sequential ? rand_int(rng, 0, 3) : 0;
            any_latency = any_latency || lat > 0;
            timing += "\"out" + std::to_string(i) + "\":{\"latency_cycles\":" +
                      std::to_string(lat) + "}";
        }
    }
    timing += "}}";

    std::string rules = "[";
    int n_rules = rand_int(rng, 0, 3);
    for (int i = 0; i < n_rules; i++) {
        if (i) rules += ",";
        const char* kind = sequential && i == 0 ? "sequential"
                           : coin(rng)          ? "boolean"
                                                : "conditional";
        rules += std::string("{\"id\":\"r") + std::to_string(i) + "\",\"kind\":\"" + kind +
                 "\",\"expression\":\"in0 ^ in" + std::to_string(rand_int(rng, 0, n_in - 1)) +
                 "\",\"outputs\":[\"out" + std::to_string(rand_int(rng, 0, n_out - 1)) + "\"]}";
    }
    rules += "]";

    std::string clocking;
    if (explicit_clocking && has_clk_port) {
        clocking = ",\"clocking\":{\"clock\":{\"name\":\"clk\",\"edge\":\"posedge\"}";
        if (has_rst)
            clocking += ",\"reset\":{\"name\":\"rst\",\"active\":\"high\",\"kind\":\"sync\"}";
        clocking += "}";
    }
    // a sequential contract with no explicit clocking needs an inferable clk
    (void)any_latency;

    std::string extras;
    if (coin(rng, 0.3)) extras += ",\"parameters\":[{\"name\":\"W\",\"type\":\"int\",\"default\":4}]";
    if (coin(rng, 0.3)) extras += ",\"test_plan\":[\"reset then load\",\"random stimulus\"]";
    if (coin(rng, 0.2)) extras += ",\"x_vendor_note\":{\"k\":1}";

    return "{\"module_name\":\"m" + std::to_string(rand_int(rng, 0, 999)) + "\",\"io\":" + io +
           clocking + ",\"timing\":" + timing +
           ",\"functional_summary\":{\"overview\":\"generated\",\"rules\":" + rules + "}" +
           extras + "}";
}

/// Abstract random graph: blocks carry only ids and R/W sets over a small
/// signal pool. Shapes line-span fields consistently so slicing can report.
inline std::vector<verisure::RtlBlock> random_block_graph(std::mt19937& rng, int max_blocks) {
    int n_blocks = rand_int(rng, 1, max_blocks);
    int n_signals = rand_int(rng, 1, 2 * n_blocks + 2);
    std::vector<verisure::RtlBlock> blocks(n_blocks);
    auto sig = [](int i) { return "s" + std::to_string(i); };
    for (int i = 0; i < n_blocks; i++) {
        blocks[i].id = i;
        blocks[i].kind = verisure::BlockKind::ContinuousAssign;
        blocks[i].start_line = 10 * i + 1;
        blocks[i].end_line = 10 * i + 3;
        int n_w = rand_int(rng, 1, 2);
        int n_r = rand_int(rng, 0, 4);
        for (int k = 0; k < n_w; k++) blocks[i].writes.insert(sig(rand_int(rng, 0, n_signals - 1)));
        for (int k = 0; k < n_r; k++) blocks[i].reads.insert(sig(rand_int(rng, 0, n_signals - 1)));
    }
    return blocks;
}

/// Random single-module synthesizable source. Signal s0..s{n-1}; each block
/// drives one signal from earlier-indexed signals, so the file always parses.
inline std::string random_rtl_source(std::mt19937& rng, int n_signals) {
    std::string src = "module rnd(input wire clk, input wire [3:0] a, input wire [3:0] b,\n"
                      "           output wire [3:0] y);\n";
    for (int i = 0; i < n_signals; i++)
        src += "  reg [3:0] s" + std::to_string(i) + ";\n";
    src += "  wire [3:0] t;\n";
    auto operand = [&](int upto) -> std::string {
        int pick = rand_int(rng, 0, upto + 1);
        if (pick == upto + 1) return coin(rng) ? "a" : "b";
        return "s" + std::to_string(pick);
    };
    int n_blocks = rand_int(rng, 1, n_signals);
    std::set<int> driven;
    for (int i = 0; i < n_blocks; i++) {
        int target = rand_int(rng, 0, n_signals - 1);
        if (!driven.insert(target).second) continue;
        std::string lhs = "s" + std::to_string(target);
        std::string rhs = operand(target) +
                          (coin(rng) ? " ^ " : " & ") + operand(target);
        if (coin(rng, 0.4)) {
            src += "  always @(posedge clk) " + lhs + " <= " + rhs + ";\n";
        } else if (coin(rng, 0.5)) {
            src += "  always @(*) begin\n    if (" + operand(target) + "[0]) " + lhs + " = " +
                   rhs + ";\n    else " + lhs + " = " + operand(target) + ";\n  end\n";
        } else {
            src += "  initial " + lhs + " = 4'd0;\n";
        }
    }
    src += "  assign t = s0 | 4'd1;\n";
    src += "  assign y = t ^ s" + std::to_string(rand_int(rng, 0, n_signals - 1)) + ";\n";
    src += "endmodule\n";
    return src;
}

} // namespace testgen
