// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "doctest.h"

#include "support/gen.hpp"
#include "verisure/patch.hpp"

using namespace verisure;

namespace {

const char* kShiftSource = R"(module shift (
    input clk,
    input d,
    output reg [3:0] q
);
  always @(posedge clk) begin
    q <= {d, q[3:1]};
  end
endmodule
)";

const char* kShiftFix = R"(always @(posedge clk) begin
    q <= {q[2:0], d};
  end)";

struct Fixture {
    DependencyGraph graph;
    SuspectSet sus;
};

Fixture analyze(const std::string& src, const std::vector<std::string>& seeds) {
    auto blocks = decompose(src);
    REQUIRE(blocks.ok());
    Fixture f;
    f.graph = build_graph(blocks.take());
    f.sus = backward_slice(f.graph, seeds, 3, {"clk"});
    return f;
}

FailureSignature sim_fail_sig(uint64_t t, int64_t m) {
    FailureSignature s;
    s.stage = SimStage::SimFail;
    s.t_f = t;
    s.m = m;
    return s;
}

FailureSignature stage_sig(SimStage stage) {
    FailureSignature s;
    s.stage = stage;
    return s;
}

} // namespace

TEST_CASE("patch replaces exactly the targeted block span") {
    Fixture f = analyze(kShiftSource, {"q"});
    REQUIRE(f.sus.block_ids.size() == 1);
    int id = f.sus.block_ids[0];
    const RtlBlock* block = f.graph.block_by_id(id);
    REQUIRE(block != nullptr);

    auto patched = apply_patch(kShiftSource, f.graph, {{id, kShiftFix}}, f.sus);
    REQUIRE(patched.ok());
    std::string out = patched.value();
    CHECK(out.find("q <= {q[2:0], d};") != std::string::npos);
    CHECK(out.find("{d, q[3:1]}") == std::string::npos);
    // Bytes outside the span are untouched.
    std::string src(kShiftSource);
    CHECK(out.substr(0, block->start_offset) == src.substr(0, block->start_offset));
    CHECK(out.substr(out.size() - (src.size() - block->end_offset)) ==
          src.substr(block->end_offset));
}

TEST_CASE("patch rejects blocks outside the suspect set") {
    Fixture f = analyze(kShiftSource, {"q"});
    SuspectSet empty;
    auto r = apply_patch(kShiftSource, f.graph, {{0, "assign x = 0;"}}, empty);
    REQUIRE(!r.ok());
    CHECK(r.error().code == "LocalityViolation");
}

TEST_CASE("patch rejects unknown and stale block ids") {
    Fixture f = analyze(kShiftSource, {"q"});
    SuspectSet sus = f.sus;
    sus.block_ids.push_back(99);
    auto r = apply_patch(kShiftSource, f.graph, {{99, "assign x = 0;"}}, sus);
    REQUIRE(!r.ok());
    CHECK(r.error().code == "UnknownBlock");

    // Same graph against different source text: offsets no longer match.
    std::string other = "// pad\n" + std::string(kShiftSource);
    auto stale = apply_patch(other, f.graph, {{f.sus.block_ids[0], kShiftFix}}, f.sus);
    REQUIRE(!stale.ok());
    CHECK(stale.error().code == "UnknownBlock");
}

TEST_CASE("patch validates op shape") {
    Fixture f = analyze(kShiftSource, {"q"});
    int id = f.sus.block_ids[0];
    auto empty = apply_patch(kShiftSource, f.graph, {{id, ""}}, f.sus);
    REQUIRE(!empty.ok());
    CHECK(empty.error().code == "BadPatch");
    auto dup = apply_patch(kShiftSource, f.graph, {{id, "a"}, {id, "b"}}, f.sus);
    REQUIRE(!dup.ok());
    CHECK(dup.error().code == "BadPatch");
}

TEST_CASE("two disjoint ops both apply with everything else preserved") {
    const char* src = R"(module two (input a, input b, output x, output y);
  assign x = a & b;
  assign y = a | b;
endmodule
)";
    auto blocks = decompose(src);
    REQUIRE(blocks.ok());
    auto graph = build_graph(blocks.take());
    REQUIRE(graph.blocks.size() == 2);
    SuspectSet sus;
    sus.block_ids = {0, 1};
    auto patched =
        apply_patch(src, graph, {{0, "assign x = a ^ b;"}, {1, "assign y = a ~| b;"}}, sus);
    REQUIRE(patched.ok());
    CHECK(patched.value().find("a ^ b") != std::string::npos);
    CHECK(patched.value().find("a ~| b") != std::string::npos);
    CHECK(patched.value().find("module two") != std::string::npos);
    CHECK(patched.value().find("endmodule") != std::string::npos);
}

TEST_CASE("signature comparison follows the canonical rules") {
    CHECK(compare_signatures(sim_fail_sig(200, 1), sim_fail_sig(300, 9)) ==
          SignatureOrder::Improved);
    CHECK(compare_signatures(sim_fail_sig(370, 5), sim_fail_sig(370, 3)) ==
          SignatureOrder::Improved);
    CHECK(compare_signatures(sim_fail_sig(370, 5), stage_sig(SimStage::CompileFail)) ==
          SignatureOrder::Regressed);
    CHECK(compare_signatures(sim_fail_sig(370, 5), stage_sig(SimStage::Pass)) ==
          SignatureOrder::Improved);
    CHECK(compare_signatures(stage_sig(SimStage::CompileFail), sim_fail_sig(10, 100)) ==
          SignatureOrder::Improved);
    CHECK(compare_signatures(sim_fail_sig(370, 5), sim_fail_sig(370, 5)) ==
          SignatureOrder::Unchanged);
    CHECK(compare_signatures(stage_sig(SimStage::Pass), stage_sig(SimStage::Pass)) ==
          SignatureOrder::Unchanged);
    CHECK(compare_signatures(sim_fail_sig(370, 5), sim_fail_sig(370, 9)) ==
          SignatureOrder::Regressed);
    CHECK(compare_signatures(sim_fail_sig(370, 5), sim_fail_sig(300, 1)) ==
          SignatureOrder::Regressed);
}

TEST_CASE("signature comparison is a strict total order") {
    std::mt19937 rng(67);
    auto random_sig = [&]() {
        FailureSignature s;
        switch (rng() % 3) {
        case 0: s.stage = SimStage::CompileFail; break;
        case 1:
            s.stage = SimStage::SimFail;
            if (rng() % 4 != 0) s.t_f = rng() % 5 * 100;
            if (rng() % 4 != 0) s.m = 1 + static_cast<int64_t>(rng() % 4);
            break;
        default: s.stage = SimStage::Pass; break;
        }
        return s;
    };
    auto key = [](const FailureSignature& s) {
        int rank = s.stage == SimStage::Pass ? 2 : (s.stage == SimStage::SimFail ? 1 : 0);
        // Oracle: lexicographic on (rank, t_f-or-0, -(m-or-1)).
        return std::make_tuple(rank, s.stage == SimStage::SimFail ? s.t_f.value_or(0) : 0,
                               s.stage == SimStage::SimFail ? -s.m.value_or(1) : 0);
    };
    for (int trial = 0; trial < 500; ++trial) {
        FailureSignature a = random_sig(), b = random_sig(), c = random_sig();
        auto ab = compare_signatures(a, b);
        auto ba = compare_signatures(b, a);
        // Oracle agreement.
        if (key(b) > key(a)) CHECK(ab == SignatureOrder::Improved);
        if (key(b) < key(a)) CHECK(ab == SignatureOrder::Regressed);
        if (key(b) == key(a)) CHECK(ab == SignatureOrder::Unchanged);
        // Antisymmetry.
        if (ab == SignatureOrder::Improved) CHECK(ba == SignatureOrder::Regressed);
        if (ab == SignatureOrder::Unchanged) CHECK(ba == SignatureOrder::Unchanged);
        // Transitivity of "not worse".
        if (compare_signatures(a, b) != SignatureOrder::Regressed &&
            compare_signatures(b, c) != SignatureOrder::Regressed) {
            CHECK(compare_signatures(a, c) != SignatureOrder::Regressed);
        }
    }
}

TEST_CASE("verbatim preservation holds on random patch applications") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        std::string src = testgen::random_rtl_source(rng, 3 + rng() % 5);
        auto blocks = decompose(src);
        REQUIRE(blocks.ok());
        auto graph = build_graph(blocks.take());
        if (graph.blocks.empty()) continue;
        SuspectSet sus;
        for (const auto& b : graph.blocks) sus.block_ids.push_back(b.id);

        size_t n_ops = 1 + rng() % std::min<size_t>(3, graph.blocks.size());
        std::vector<int> ids;
        for (const auto& b : graph.blocks) ids.push_back(b.id);
        std::shuffle(ids.begin(), ids.end(), rng);
        ids.resize(n_ops);
        std::sort(ids.begin(), ids.end());

        std::vector<PatchOp> ops;
        for (int id : ids) {
            ops.push_back({id, "/* patched " + std::to_string(rng() % 1000) + " */"});
        }
        auto patched = apply_patch(src, graph, ops, sus);
        REQUIRE(patched.ok());

        // Forward-splice oracle built independently of the implementation.
        std::string expected;
        size_t cursor = 0;
        for (size_t i = 0; i < ids.size(); ++i) {
            const RtlBlock* b = graph.block_by_id(ids[i]);
            expected += src.substr(cursor, b->start_offset - cursor);
            expected += ops[i].replacement;
            cursor = b->end_offset;
        }
        expected += src.substr(cursor);
        CHECK(patched.value() == expected);
    }
}

TEST_CASE("try patch keeps improvements and reverts regressions") {
    Json fixture = Json::parse(R"({
      "runs": [
        {"compile_exit": 0, "sim_exit": 1,
         "sim_output": "Mismatch at time 370\nTotal mismatched samples is 3 out of 10 samples\n"},
        {"compile_exit": 1, "compile_output": "%Error: syntax error"},
        {"compile_exit": 0, "sim_exit": 0, "sim_output": "ALL TESTS PASSED\n"}
      ]
    })");
    auto backend = make_scripted_backend(fixture, "");
    REQUIRE(backend.ok());

    PatchSession session;
    session.source = kShiftSource;
    auto blocks = decompose(session.source);
    REQUIRE(blocks.ok());
    session.graph = build_graph(blocks.take());
    session.suspects = backward_slice(session.graph, {"q"}, 3, {"clk"});
    session.signature = sim_fail_sig(370, 5);
    session.seed_signals = {"q"};
    session.exclude_reads = {"clk"};
    session.backend = backend.value().get();
    session.job.top = "shift";

    int id = session.suspects.block_ids.at(0);

    // Run 1: same t_f, fewer mismatches -> kept.
    auto first = try_patch(session, {{id, kShiftFix}});
    REQUIRE(first.ok());
    CHECK(first.value().accepted);
    CHECK(first.value().after == sim_fail_sig(370, 3));
    CHECK(session.source.find("q <= {q[2:0], d};") != std::string::npos);
    CHECK(session.signature == sim_fail_sig(370, 3));
    REQUIRE(!session.suspects.block_ids.empty()); // slice recomputed on the new source

    std::string kept = session.source;
    int id2 = session.suspects.block_ids.at(0);

    // Run 2: compile break -> rolled back.
    auto second = try_patch(session, {{id2, "always @(posedge clk) begin q <= ; end"}});
    REQUIRE(second.ok());
    CHECK(!second.value().accepted);
    CHECK(second.value().after.stage == SimStage::CompileFail);
    CHECK(session.source == kept);
    CHECK(session.signature == sim_fail_sig(370, 3));

    // Run 3: pass -> kept, monotone sequence complete.
    auto third = try_patch(session, {{id2, kShiftFix}});
    REQUIRE(third.ok());
    CHECK(third.value().accepted);
    CHECK(third.value().after.stage == SimStage::Pass);
    CHECK(session.signature.stage == SimStage::Pass);

    // Fixture exhausted: infrastructure error, session untouched.
    std::string before_error = session.source;
    auto fourth = try_patch(session, {{session.suspects.block_ids.at(0), kShiftFix}});
    REQUIRE(!fourth.ok());
    CHECK(fourth.error().code == "SessionError");
    CHECK(session.source == before_error);
}

TEST_CASE("try patch surfaces locality violations without simulating") {
    PatchSession session;
    session.source = kShiftSource;
    auto blocks = decompose(session.source);
    REQUIRE(blocks.ok());
    session.graph = build_graph(blocks.take());
    session.suspects = SuspectSet{}; // nothing editable
    auto r = try_patch(session, {{0, kShiftFix}});
    REQUIRE(!r.ok());
    CHECK(r.error().code == "LocalityViolation");
}
