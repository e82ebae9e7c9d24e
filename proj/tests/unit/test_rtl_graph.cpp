// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <random>

#include "support/gen.hpp"
#include "verisure/rtl_graph.hpp"

using namespace verisure;

namespace {

std::vector<RtlBlock> decompose_ok(const std::string& src) {
    auto r = decompose(src);
    if (!r.ok()) FAIL(r.error().message << " at " << r.error().path);
    return r.take();
}

bool contains(const std::set<std::string>& s, const std::string& v) { return s.count(v) > 0; }

} // namespace

TEST_CASE("single continuous assign") {
    auto blocks = decompose_ok("module m(input a, input b, output y);\n"
                               "  assign y = a & b;\n"
                               "endmodule\n");
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].kind == BlockKind::ContinuousAssign);
    CHECK(blocks[0].reads == std::set<std::string>{"a", "b"});
    CHECK(blocks[0].writes == std::set<std::string>{"y"});
    CHECK(blocks[0].start_line == 2);
    CHECK(blocks[0].end_line == 2);
    CHECK(blocks[0].text == "assign y = a & b;");
}

TEST_CASE("shift block reads and writes") {
    auto blocks = decompose_ok(
        "module shift(input clk, input shift_ena, input data, output reg [3:0] q);\n"
        "  always @(posedge clk) begin\n"
        "    if (shift_ena)\n"
        "      q <= {q[2:0], data};\n"
        "  end\n"
        "endmodule\n");
    REQUIRE(blocks.size() == 1);
    const auto& b = blocks[0];
    CHECK(b.kind == BlockKind::AlwaysGeneric);
    CHECK(b.writes == std::set<std::string>{"q"});
    CHECK(contains(b.reads, "shift_ena"));
    CHECK(contains(b.reads, "data"));
    CHECK(contains(b.reads, "q"));
    CHECK(contains(b.reads, "clk"));
    REQUIRE(b.edge_events.size() == 1);
    CHECK(b.edge_events[0].posedge);
    CHECK(b.edge_events[0].signal == "clk");
}

TEST_CASE("two always blocks have disjoint spans") {
    auto blocks = decompose_ok("module m(input clk, input d, output reg a, output reg b);\n"
                               "  always @(posedge clk) a <= d;\n"
                               "  always @(posedge clk) b <= a;\n"
                               "endmodule\n");
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].end_offset <= blocks[1].start_offset);
    CHECK(blocks[0].end_line < blocks[1].start_line);
}

TEST_CASE("case selector is read") {
    auto blocks = decompose_ok(
        "module m(input [1:0] sel, input a, input b, output reg y);\n"
        "  always @(*) begin\n"
        "    case (sel)\n"
        "      2'b00: y = a;\n"
        "      default: y = b;\n"
        "    endcase\n"
        "  end\n"
        "endmodule\n");
    REQUIRE(blocks.size() == 1);
    CHECK(contains(blocks[0].reads, "sel"));
    CHECK(blocks[0].case_count == 1);
}

TEST_CASE("always_ff and always_comb kinds") {
    auto blocks = decompose_ok("module m(input clk, input d, output logic q, output logic y);\n"
                               "  always_ff @(posedge clk) q <= d;\n"
                               "  always_comb y = q ^ d;\n"
                               "endmodule\n");
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].kind == BlockKind::AlwaysFf);
    CHECK(blocks[1].kind == BlockKind::AlwaysComb);
}

TEST_CASE("instance with in-file definition uses port directions") {
    auto blocks = decompose_ok("module leaf(input i, output o);\n"
                               "  assign o = ~i;\n"
                               "endmodule\n"
                               "module top(input x, output z);\n"
                               "  wire mid;\n"
                               "  leaf u0(.i(x), .o(mid));\n"
                               "  assign z = mid;\n"
                               "endmodule\n");
    REQUIRE(blocks.size() == 3);
    const auto& inst = blocks[1];
    CHECK(inst.kind == BlockKind::ModuleInstance);
    CHECK(inst.reads == std::set<std::string>{"x"});
    CHECK(inst.writes == std::set<std::string>{"mid"});
}

TEST_CASE("instance of unknown module is conservative") {
    auto blocks = decompose_ok("module top(input x, output z);\n"
                               "  wire mid;\n"
                               "  mystery u0(.din(x), .dout(mid));\n"
                               "  assign z = mid;\n"
                               "endmodule\n");
    const auto& inst = blocks[0];
    CHECK(contains(inst.reads, "x"));
    CHECK(contains(inst.reads, "mid"));
    CHECK(contains(inst.writes, "mid")); // formal name suggests an output
    CHECK(!contains(inst.writes, "x"));
}

TEST_CASE("positional instance of unknown module reads and writes everything") {
    auto blocks = decompose_ok("module top(input x, output z);\n"
                               "  wire mid;\n"
                               "  mystery u0(mid, x);\n"
                               "  assign z = mid;\n"
                               "endmodule\n");
    const auto& inst = blocks[0];
    CHECK(inst.reads == std::set<std::string>{"mid", "x"});
    CHECK(inst.writes == std::set<std::string>{"mid", "x"});
}

TEST_CASE("wire declaration with initializer is a continuous assign") {
    auto blocks = decompose_ok("module m(input a, output y);\n"
                               "  wire t = a ^ 1'b1;\n"
                               "  assign y = t;\n"
                               "endmodule\n");
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].kind == BlockKind::ContinuousAssign);
    CHECK(blocks[0].writes == std::set<std::string>{"t"});
    CHECK(blocks[0].reads == std::set<std::string>{"a"});
}

TEST_CASE("gate primitive instance") {
    auto blocks = decompose_ok("module m(input a, input b, output y);\n"
                               "  and g0(y, a, b);\n"
                               "endmodule\n");
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].kind == BlockKind::ModuleInstance);
    CHECK(blocks[0].writes == std::set<std::string>{"y"});
    CHECK(blocks[0].reads == std::set<std::string>{"a", "b"});
}

TEST_CASE("generate region is one opaque block") {
    auto blocks = decompose_ok("module m(input [3:0] a, output [3:0] y);\n"
                               "  genvar i;\n"
                               "  generate\n"
                               "    for (i = 0; i < 4; i = i + 1) begin : g\n"
                               "      assign y[i] = ~a[i];\n"
                               "    end\n"
                               "  endgenerate\n"
                               "endmodule\n");
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].kind == BlockKind::ModuleInstance);
    CHECK(contains(blocks[0].writes, "y"));
    CHECK(contains(blocks[0].reads, "a"));
}

TEST_CASE("syntax error carries location") {
    auto r = decompose("module m(input a;\n  always begin\nendmodule\n");
    REQUIRE(!r.ok());
    CHECK(r.error().code == "SyntaxError");
    CHECK(!r.error().path.empty());
}

TEST_CASE("declarations are not blocks") {
    auto blocks = decompose_ok("module m(input clk);\n"
                               "  reg [7:0] counter;\n"
                               "  integer i;\n"
                               "  parameter WIDTH = 8;\n"
                               "endmodule\n");
    CHECK(blocks.empty());
}

TEST_CASE("graph edges follow write-read pairs") {
    auto blocks = decompose_ok("module m(input a, output c);\n"
                               "  wire t;\n"
                               "  assign t = ~a;\n"
                               "  assign c = t & a;\n"
                               "endmodule\n");
    auto g = build_graph(std::move(blocks));
    CHECK(g.edges.count({0, 1}) == 1);
    CHECK(g.edges.count({1, 0}) == 0);
    CHECK(g.driver_map.at("t") == std::set<int>{0});
}

TEST_CASE("self-loop when a block reads its own register") {
    auto blocks = decompose_ok("module m(input clk, output reg [3:0] q);\n"
                               "  always @(posedge clk) q <= q - 1;\n"
                               "endmodule\n");
    auto g = build_graph(std::move(blocks));
    CHECK(g.edges.count({0, 0}) == 1);
}

TEST_CASE("two drivers appear in the driver map") {
    auto blocks = decompose_ok("module m(input a, input b, output w);\n"
                               "  assign w = a;\n"
                               "  assign w = b;\n"
                               "endmodule\n");
    auto g = build_graph(std::move(blocks));
    CHECK(g.driver_map.at("w") == std::set<int>{0, 1});
}

TEST_CASE("backward slice depth bounds") {
    auto blocks = decompose_ok("module m(input a, output c);\n"
                               "  wire b;\n"
                               "  assign b = ~a;\n"     // block 0: f
                               "  assign c = b & b;\n"  // block 1: g
                               "endmodule\n");
    auto g = build_graph(std::move(blocks));

    auto d0 = backward_slice(g, {"c"}, 0);
    CHECK(d0.block_ids == std::vector<int>{1});

    auto d1 = backward_slice(g, {"c"}, 1);
    CHECK(d1.block_ids == std::vector<int>{1, 0}); // discovery order: depth then id
    CHECK(d1.line_ranges.size() == 2);

    auto missing = backward_slice(g, {"nonexistent"}, 3);
    CHECK(missing.block_ids.empty());
    REQUIRE(missing.warnings.size() == 1);
    CHECK(missing.warnings[0].code == "EmptySlice");
}

TEST_CASE("excluded reads stop traversal") {
    auto blocks = decompose_ok("module m(input clk_in, output reg q);\n"
                               "  reg clk;\n"
                               "  always @(posedge clk_in) clk <= ~clk;\n"
                               "  always @(posedge clk) q <= ~q;\n"
                               "endmodule\n");
    auto g = build_graph(std::move(blocks));
    auto with = backward_slice(g, {"q"}, 3);
    CHECK(with.block_ids == std::vector<int>{1, 0}); // clk read pulls in the divider
    auto without = backward_slice(g, {"q"}, 3, {"clk"});
    CHECK(without.block_ids == std::vector<int>{1});
}

TEST_CASE("slice monotonicity and determinism on random sources") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 30; trial++) {
        std::string src = testgen::random_rtl_source(rng, testgen::rand_int(rng, 2, 6));
        auto blocks = decompose_ok(src);
        auto blocks2 = decompose_ok(src);
        REQUIRE(blocks.size() == blocks2.size());
        for (size_t i = 0; i < blocks.size(); i++) {
            CHECK(blocks[i].text == blocks2[i].text);
            CHECK(blocks[i].reads == blocks2[i].reads);
            CHECK(blocks[i].writes == blocks2[i].writes);
        }
        auto g = build_graph(std::move(blocks));
        std::vector<int> prev;
        for (int d = 0; d <= 4; d++) {
            auto s = backward_slice(g, {"y"}, d);
            std::set<int> now(s.block_ids.begin(), s.block_ids.end());
            std::set<int> before(prev.begin(), prev.end());
            for (int id : before) CHECK(now.count(id) == 1);
            prev = s.block_ids;
        }
    }
}
