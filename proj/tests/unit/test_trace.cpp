// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "doctest.h"

#include "verisure/sim_runner.hpp"
#include "verisure/trace.hpp"

using namespace verisure;

namespace {

FourStateValue bits(const std::string& b) {
    FourStateValue v;
    v.width = static_cast<int>(b.size());
    v.bits = b;
    return v;
}

std::vector<FourStateValue> scalar_series(const std::vector<int>& values, int width = 8) {
    std::vector<FourStateValue> out;
    for (int value : values) {
        std::string b;
        for (int i = width - 1; i >= 0; --i) b.push_back(((value >> i) & 1) ? '1' : '0');
        out.push_back(bits(b));
    }
    return out;
}

// A 2-signal dump with a uniform 10-unit clock starting high, one vector
// signal q, and a golden companion q_expected.
const char* kBasicVcd = R"($date today $end
$timescale 1ns $end
$scope module tb $end
$var wire 1 ! clk $end
$var wire 4 " q $end
$var wire 4 # q_expected $end
$scope module dut $end
$var wire 1 $ en $end
$upscope $end
$upscope $end
$enddefinitions $end
$dumpvars
1!
b0000 "
b0000 #
1$
$end
#10
0!
#20
1!
b0001 "
b0001 #
#30
0!
#40
1!
b0010 "
b0011 #
#50
0!
#60
1!
b0100 "
b0111 #
)";

} // namespace

TEST_CASE("four-state value display uses binary up to width 4 and hex above") {
    CHECK(bits("1010").display() == "1010");
    CHECK(bits("x01z").display() == "x01z");
    CHECK(bits("00011111").display() == "0x1f");
    CHECK(bits("1x000001").display() == "0xx1");
    CHECK(bits("110zzzz1").display() == "0xzz"); // any z nibble renders as z
    FourStateValue wide = bits("110100101");
    CHECK(wide.display() == "0x1a5");
}

TEST_CASE("vcd left-extension pads with zero and with x or z") {
    CHECK(FourStateValue::from_vcd("1", 4).bits == "0001");
    CHECK(FourStateValue::from_vcd("x1", 4).bits == "xxx1");
    CHECK(FourStateValue::from_vcd("z0", 4).bits == "zzz0");
    CHECK(FourStateValue::from_vcd("110100", 4).bits == "0100");
}

TEST_CASE("vcd parse exposes step-function value queries") {
    auto db = parse_vcd(kBasicVcd);
    REQUIRE(db.ok());
    CHECK(db.value().value_at("q", 15).bits == "0000");
    CHECK(db.value().value_at("q", 20).bits == "0001");
    CHECK(db.value().value_at("q", 25).bits == "0001");
    CHECK(db.value().value_at("tb.q", 45).bits == "0010");
    CHECK(db.value().value_at("en", 100).bits == "1");
    CHECK(db.value().timescale() == "1ns");
}

TEST_CASE("vcd value before first change comes from dumpvars, else all-x") {
    auto db = parse_vcd(kBasicVcd);
    REQUIRE(db.ok());
    CHECK(db.value().value_at("q", 0).bits == "0000");
    const char* no_init = R"($timescale 1ns $end
$var wire 2 ! a $end
$enddefinitions $end
#10
b11 !
)";
    auto db2 = parse_vcd(no_init);
    REQUIRE(db2.ok());
    CHECK(db2.value().value_at("a", 5).bits == "xx");
    CHECK(db2.value().value_at("a", 10).bits == "11");
}

TEST_CASE("vcd errors carry a byte offset and reals are skipped with warning") {
    std::string bad = "$var wire 1 ! clk $end\n$enddefinitions $end\n#5\n@!\n";
    auto r = parse_vcd(bad);
    REQUIRE(!r.ok());
    CHECK(r.error().code == "VcdError");
    CHECK(r.error().path == "byte " + std::to_string(bad.find('@')));

    const char* with_real = R"($timescale 1ns $end
$var real 64 % temp $end
$var wire 1 ! clk $end
$enddefinitions $end
#0
r1.5 %
1!
)";
    auto r2 = parse_vcd(with_real);
    REQUIRE(r2.ok());
    REQUIRE(r2.value().warnings().size() == 1);
    CHECK(r2.value().warnings()[0].code == "RealSkipped");
    CHECK(r2.value().value_at("clk", 0).bits == "1");
    CHECK(!r2.value().has_signal("temp"));
}

TEST_CASE("vcd rejects backwards time and truncated declarations") {
    auto r = parse_vcd("$var wire 1 ! a $end\n$enddefinitions $end\n#20\n1!\n#10\n0!\n");
    REQUIRE(!r.ok());
    CHECK(r.error().code == "VcdError");
    auto r2 = parse_vcd("$var wire 1 !\n");
    REQUIRE(!r2.ok());
}

TEST_CASE("vcd round-trip: replaying the change list reproduces every query") {
    auto db = parse_vcd(kBasicVcd);
    REQUIRE(db.ok());
    for (const auto& var : db.value().vars()) {
        auto series = db.value().series(var.full_path());
        FourStateValue current = FourStateValue::all_x(var.width);
        size_t next = 0;
        std::vector<uint64_t> stamps = {0, 10, 20, 30, 40, 50, 60};
        for (uint64_t t : stamps) {
            while (next < series.size() && series[next].first <= t) {
                current = series[next].second;
                ++next;
            }
            CHECK(db.value().value_at(var.full_path(), t) == current);
        }
    }
}

TEST_CASE("first divergence returns the earliest mismatching grid point") {
    std::vector<uint64_t> grid = {0, 10, 20, 30};
    auto obs = scalar_series({0, 1, 1, 0}, 1);
    auto exp = scalar_series({0, 1, 0, 0}, 1);
    std::vector<std::vector<FourStateValue>> obs_rows, exp_rows;
    for (size_t i = 0; i < grid.size(); ++i) {
        obs_rows.push_back({obs[i]});
        exp_rows.push_back({exp[i]});
    }
    CHECK(first_divergence(grid, obs_rows, exp_rows) == 20);
    CHECK(first_divergence(grid, obs_rows, obs_rows) == std::nullopt);

    auto first = exp_rows;
    first[0][0] = bits("1");
    CHECK(first_divergence(grid, first, exp_rows) == 0);
}

TEST_CASE("first divergence treats x and z as unequal to everything else") {
    std::vector<uint64_t> grid = {0, 10};
    std::vector<std::vector<FourStateValue>> a = {{bits("x")}, {bits("1")}};
    std::vector<std::vector<FourStateValue>> b = {{bits("z")}, {bits("1")}};
    CHECK(first_divergence(grid, a, b) == 0);
    std::vector<std::vector<FourStateValue>> c = {{bits("x")}, {bits("1")}};
    CHECK(first_divergence(grid, a, c) == std::nullopt); // x equals x itself
}

TEST_CASE("first divergence agrees with a linear-scan oracle on random series") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        size_t n = 1 + rng() % 40;
        std::vector<uint64_t> grid(n);
        for (size_t i = 0; i < n; ++i) grid[i] = i * 7;
        std::vector<std::vector<FourStateValue>> obs, exp;
        for (size_t i = 0; i < n; ++i) {
            int v1 = static_cast<int>(rng() % 4);
            int v2 = rng() % 3 == 0 ? static_cast<int>(rng() % 4) : v1;
            obs.push_back(scalar_series({v1}, 2));
            exp.push_back(scalar_series({v2}, 2));
        }
        std::optional<uint64_t> oracle;
        for (size_t i = 0; i < n; ++i) {
            if (!(obs[i][0] == exp[i][0])) {
                oracle = grid[i];
                break;
            }
        }
        CHECK(first_divergence(grid, obs, exp) == oracle);
    }
}

TEST_CASE("alignment recovers a one-sample delay with zero score") {
    auto exp = scalar_series({1, 2, 3, 4, 5, 6, 7, 8});
    auto obs = scalar_series({0, 1, 2, 3, 4, 5, 6, 7});
    auto hint = alignment_check(obs, exp);
    REQUIRE(hint.has_value());
    CHECK(hint->best_delta == 1);
    CHECK(hint->scores.at(1) == 0);
    CHECK(hint->significant);
    CHECK(hint_text(*hint) == "best alignment at δ=+1: output appears 1 cycle late");
}

TEST_CASE("alignment on identical series is delta zero and not significant") {
    auto exp = scalar_series({3, 1, 4, 1, 5, 9, 2, 6});
    auto hint = alignment_check(exp, exp);
    REQUIRE(hint.has_value());
    CHECK(hint->best_delta == 0);
    CHECK(hint->scores.at(0) == 0);
    CHECK(!hint->significant);
}

TEST_CASE("alignment hint omitted below four samples") {
    auto s = scalar_series({1, 2, 3});
    CHECK(!alignment_check(s, s).has_value());
}

TEST_CASE("alignment hint text covers early shifts and plurals") {
    AlignmentHint hint;
    hint.best_delta = -1;
    CHECK(hint_text(hint) == "best alignment at δ=-1: output appears 1 cycle early");
    hint.best_delta = 2;
    CHECK(hint_text(hint) == "best alignment at δ=+2: output appears 2 cycles late");
    hint.best_delta = -2;
    CHECK(hint_text(hint) == "best alignment at δ=-2: output appears 2 cycles early");
    hint.best_delta = 0;
    CHECK(hint_text(hint) == "best alignment at δ=0: no consistent shift");
}

TEST_CASE("alignment ties break toward smaller shift then toward negative") {
    // Constant series: every delta scores zero; delta 0 must win.
    auto flat = scalar_series({5, 5, 5, 5, 5, 5});
    auto hint = alignment_check(flat, flat);
    REQUIRE(hint.has_value());
    CHECK(hint->best_delta == 0);
    CHECK(!hint->significant);
}

TEST_CASE("shift recovery property over all deltas") {
    std::mt19937 rng(41);
    for (int target = -2; target <= 2; ++target) {
        for (int trial = 0; trial < 40; ++trial) {
            // Strictly increasing values make accidental alignment impossible.
            std::vector<int> base;
            int v = static_cast<int>(rng() % 3);
            for (int i = 0; i < 16; ++i) {
                base.push_back(v);
                v += 1 + static_cast<int>(rng() % 3);
            }
            auto exp = scalar_series(base);
            std::vector<FourStateValue> obs(exp.size(), exp.front());
            for (size_t i = 0; i < exp.size(); ++i) {
                long j = static_cast<long>(i) - target;
                if (j >= 0 && j < static_cast<long>(exp.size())) {
                    obs[i] = exp[static_cast<size_t>(j)];
                }
            }
            auto hint = alignment_check(obs, exp);
            REQUIRE(hint.has_value());
            CHECK(hint->best_delta == target);
            CHECK(hint->scores.at(target) == 0);
        }
    }
}

TEST_CASE("extract window samples at active edges and elides constants") {
    auto db = parse_vcd(kBasicVcd);
    REQUIRE(db.ok());
    ClockingSpec clocking;
    clocking.clock = ClockSpec{std::string("clk"), std::string("posedge")};
    auto w = extract_window(db.value(), clocking, 60, 8, {"q", "en", "clk"});
    REQUIRE(w.ok());
    const TraceWindow& win = w.value();
    CHECK(win.clock_period == 20); // rising edges at 0,20,40,60
    CHECK(win.sample_times == std::vector<uint64_t>{0, 20, 40, 60});
    REQUIRE(win.signals.size() == 1);
    CHECK(win.signals[0].first == "q");
    CHECK(win.signals[0].second[3].bits == "0100");
    // en is constant 1; clk is 1 at each rising edge.
    CHECK(win.elided == std::vector<std::string>{"en", "clk"});
    CHECK(win.elided_values.at("en") == "1");
    CHECK(win.warnings.empty());
}

TEST_CASE("extract window clamps to the requested span") {
    auto db = parse_vcd(kBasicVcd);
    REQUIRE(db.ok());
    ClockingSpec clocking;
    clocking.clock = ClockSpec{std::string("clk"), std::string("posedge")};
    auto w = extract_window(db.value(), clocking, 60, 1, {"q"});
    REQUIRE(w.ok());
    CHECK(w.value().sample_times == std::vector<uint64_t>{40, 60});
    for (uint64_t t : w.value().sample_times) {
        CHECK(t >= 60 - 1 * w.value().clock_period);
        CHECK(t <= 60);
    }
}

TEST_CASE("extract window reports missing clock and degenerate clocks") {
    auto db = parse_vcd(kBasicVcd);
    REQUIRE(db.ok());
    ClockingSpec clocking;
    clocking.clock = ClockSpec{std::string("nope"), std::string("posedge")};
    auto w = extract_window(db.value(), clocking, 60, 8, {"q"});
    REQUIRE(!w.ok());
    CHECK(w.error().code == "ClockNotFound");

    const char* one_edge = R"($var wire 1 ! clk $end
$var wire 1 " d $end
$enddefinitions $end
#5
1!
0"
#9
1"
)";
    auto db2 = parse_vcd(one_edge);
    REQUIRE(db2.ok());
    auto w2 = extract_window(db2.value(), clocking = ClockingSpec{}, 9, 8, {"d"});
    REQUIRE(!w2.ok()); // no clock named in the contract
    ClockingSpec c3;
    c3.clock = ClockSpec{std::string("clk"), std::string("posedge")};
    auto w3 = extract_window(db2.value(), c3, 9, 8, {"d"});
    REQUIRE(w3.ok());
    CHECK(w3.value().clock_period == 0);
    REQUIRE(w3.value().warnings.size() == 1);
    CHECK(w3.value().warnings[0].code == "NonUniformClock");
    CHECK(w3.value().sample_times == std::vector<uint64_t>{5});
}

TEST_CASE("extract window honors negedge sampling") {
    auto db = parse_vcd(kBasicVcd);
    REQUIRE(db.ok());
    ClockingSpec clocking;
    clocking.clock = ClockSpec{std::string("clk"), std::string("negedge")};
    auto w = extract_window(db.value(), clocking, 55, 8, {"q"});
    REQUIRE(w.ok());
    CHECK(w.value().sample_times == std::vector<uint64_t>{10, 30, 50});
}

TEST_CASE("build report assembles failure, window, alignment and suspects") {
    auto db = parse_vcd(kBasicVcd);
    REQUIRE(db.ok());
    const char* src = R"(module t(input clk, input en, output reg [3:0] q);
  always_ff @(posedge clk) begin
    if (en) q <= q + 1;
  end
endmodule
)";
    auto blocks = decompose(src);
    REQUIRE(blocks.ok());
    auto graph = build_graph(blocks.take());
    auto sus = backward_slice(graph, {"q"}, 3, {"clk"});
    REQUIRE(!sus.block_ids.empty());

    DesignContract contract;
    contract.module_name = "t";
    contract.io = std::vector<Port>{};
    contract.io->push_back({std::string("clk"), std::string("input"), 1, ""});
    contract.io->push_back({std::string("en"), std::string("input"), 1, ""});
    contract.io->push_back({std::string("q"), std::string("output"), 4, ""});
    ClockingSpec clocking;
    clocking.clock = ClockSpec{std::string("clk"), std::string("posedge")};
    contract.clocking = clocking;

    std::string log = "Mismatch at time 60: q expected=0111 observed=0100\n";
    TraceReport rep = build_report(&db.value(), log, contract, graph, sus, 8);
    CHECK(rep.t_f == 60);
    REQUIRE(rep.failing_signals.size() == 1);
    CHECK(rep.failing_signals[0].name == "q");
    CHECK(rep.failing_signals[0].observed == "0100");
    CHECK(rep.failing_signals[0].expected == "0111");
    REQUIRE(rep.window.has_value());
    CHECK(rep.window->clock_period == 20);
    CHECK(rep.expected_source == "vcd"); // q_expected found in the dump
    REQUIRE(!rep.suspect_rows.empty());
    CHECK(rep.suspect_rows[0].kind == "always_ff");

    std::string text = render_report(rep);
    CHECK(text.find("FAILURE") != std::string::npos);
    CHECK(text.find("ALIGNMENT") != std::string::npos);
    CHECK(text.find("TRACE") != std::string::npos);
    CHECK(text.find("SUSPECTS") != std::string::npos);
    CHECK(text.find("first divergence: t=60") != std::string::npos);
    CHECK(render_report(rep) == text); // deterministic

    Json j = report_to_json(rep);
    CHECK(j["t_f"] == 60);
    CHECK(j["failing_signals"][0]["name"] == "q");
    CHECK(j["suspects"]["blocks"][0]["kind"] == "always_ff");
}

TEST_CASE("build report degrades to log-only when no vcd exists") {
    DesignContract contract;
    DependencyGraph graph;
    SuspectSet sus;
    std::string log = "%Error: shift.v:3: syntax error, unexpected ';'\n";
    TraceReport rep = build_report(nullptr, log, contract, graph, sus, 8);
    CHECK(!rep.t_f.has_value());
    CHECK(rep.diagnostics == log);
    CHECK(!rep.window.has_value());
    std::string text = render_report(rep);
    CHECK(text.find("t_f: (not determined)") != std::string::npos);
    CHECK(text.find("syntax error") != std::string::npos);
    Json j = report_to_json(rep);
    CHECK(j["t_f"].is_null());
}
