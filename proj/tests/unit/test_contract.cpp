// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <random>

#include "support/gen.hpp"
#include "verisure/contract.hpp"

using namespace verisure;

namespace {

const char* kMinimal = R"({
  "module_name": "tiny",
  "io": [
    {"name": "a", "dir": "input", "width": 1, "description": "in"},
    {"name": "y", "dir": "output", "width": 1, "description": "out"}
  ],
  "timing": {"outputs": {"y": {"latency_cycles": 0}}},
  "functional_summary": {"overview": "y follows a", "rules": []}
})";

const char* kShiftRegister = R"({
  "module_name": "shift4",
  "io": [
    {"name": "clk", "dir": "input", "width": 1, "description": "clock"},
    {"name": "areset", "dir": "input", "width": 1, "description": "async reset"},
    {"name": "data", "dir": "input", "width": 1, "description": "serial in"},
    {"name": "q", "dir": "output", "width": 4, "description": "shift out"}
  ],
  "clocking": {
    "clock": {"name": "clk", "edge": "posedge"},
    "reset": {"name": "areset", "active": "high", "kind": "async"}
  },
  "timing": {"outputs": {"q": {"latency_cycles": 1}}},
  "functional_summary": {
    "overview": "4-bit right-rotating shift register",
    "rules": [
      {"id": "shift", "kind": "sequential", "expression": "q <= {q[2:0], data}", "outputs": ["q"]}
    ]
  }
})";

DesignContract parse_ok(const std::string& text) {
    auto r = parse_contract(text);
    REQUIRE(r.ok());
    return r.take();
}

bool has_issue(const std::vector<LintIssue>& list, const std::string& code,
               const std::string& path_prefix = "") {
    for (const auto& i : list) {
        if (i.code == code && (path_prefix.empty() || i.path.rfind(path_prefix, 0) == 0))
            return true;
    }
    return false;
}

} // namespace

TEST_CASE("minimal contract parses to two ports") {
    auto c = parse_ok(kMinimal);
    REQUIRE(c.io.has_value());
    CHECK(c.io->size() == 2);
    CHECK(*c.module_name == "tiny");
    CHECK(*c.latency_of("y") == 0);
}

TEST_CASE("string width is a type error at the right path") {
    auto r = parse_contract(R"({"io": [{"name": "a", "dir": "input", "width": "8"}]})");
    REQUIRE(!r.ok());
    CHECK(r.error().code == "ParseError::Type");
    CHECK(r.error().path == "io[0].width");
}

TEST_CASE("malformed JSON is ParseError::Json") {
    auto r = parse_contract("{not json");
    REQUIRE(!r.ok());
    CHECK(r.error().code == "ParseError::Json");
}

TEST_CASE("shift-register clocking enums parse") {
    auto c = parse_ok(kShiftRegister);
    REQUIRE(c.clocking.has_value());
    CHECK(c.clocking->clock->edge_enum() == ClockEdge::Posedge);
    CHECK(c.clocking->reset->active_enum() == ResetActive::High);
    CHECK(c.clocking->reset->kind_enum() == ResetKind::Async);
    auto report = lint(c);
    CHECK(report.errors.empty());
    CHECK(report.warnings.empty());
}

TEST_CASE("unknown top-level keys are preserved") {
    auto c = parse_ok(R"({"module_name": "m", "x_extra": {"a": 1}})");
    CHECK(c.extensions.contains("x_extra"));
}

TEST_CASE("missing timing is SchemaMissingKey") {
    auto c = parse_ok(R"({"module_name": "m", "io": [],
                          "functional_summary": {"overview": "", "rules": []}})");
    auto report = lint(c);
    CHECK(has_issue(report.errors, "SchemaMissingKey", "timing"));
    CHECK(!report.canonical.has_value());
}

TEST_CASE("clock absent from io is UnknownSignal at clocking.clock.name") {
    std::string text = R"({
      "module_name": "m",
      "io": [{"name": "a", "dir": "input"}, {"name": "y", "dir": "output"}],
      "clocking": {"clock": {"name": "clk", "edge": "posedge"}},
      "timing": {"outputs": {}},
      "functional_summary": {"overview": "", "rules": []}
    })";
    auto report = lint(parse_ok(text));
    REQUIRE(has_issue(report.errors, "UnknownSignal", "clocking.clock.name"));
}

TEST_CASE("missing timing entry defaults to zero with a warning") {
    std::string text = R"({
      "module_name": "m",
      "io": [{"name": "a", "dir": "input", "width": 2},
             {"name": "q", "dir": "output", "width": 2}],
      "timing": {"outputs": {}},
      "functional_summary": {"overview": "", "rules": []}
    })";
    auto report = lint(parse_ok(text));
    REQUIRE(report.errors.empty());
    CHECK(has_issue(report.warnings, "DefaultedLatency", "timing.outputs.q"));
    CHECK(*report.canonical->latency_of("q") == 0);
}

TEST_CASE("scalar ports get width 1") {
    std::string text = R"({
      "module_name": "m",
      "io": [{"name": "a", "dir": "input"}, {"name": "y", "dir": "output"}],
      "timing": {"outputs": {"y": {"latency_cycles": 0}}},
      "functional_summary": {"overview": "", "rules": []}
    })";
    auto report = lint(parse_ok(text));
    REQUIRE(report.errors.empty());
    CHECK(has_issue(report.warnings, "DefaultedWidth"));
    CHECK(*(*report.canonical->io)[0].width == 1);
}

TEST_CASE("lint error codes fire on their cases") {
    auto lint_text = [&](const std::string& io_mid, const std::string& extra = "") {
        std::string text = R"({"module_name": "m", "io": [)" + io_mid +
                           R"(], "timing": {"outputs": {}},
                              "functional_summary": {"overview": "", "rules": []})" + extra + "}";
        return lint(parse_ok(text));
    };
    CHECK(has_issue(lint_text(R"({"name": "a", "dir": "bidir"})").errors, "BadEnum"));
    CHECK(has_issue(lint_text(R"({"name": "a", "dir": "input", "width": 0})").errors, "BadWidth"));
    CHECK(has_issue(lint_text(R"({"name": "2bad", "dir": "input"})").errors, "BadIdentifier"));
    CHECK(has_issue(
        lint_text(R"({"name": "a", "dir": "input"}, {"name": "a", "dir": "input"})").errors,
        "DuplicatePort"));

    auto neg = parse_ok(R"({"module_name": "m",
        "io": [{"name": "y", "dir": "output"}],
        "timing": {"outputs": {"y": {"latency_cycles": -1}}},
        "functional_summary": {"overview": "", "rules": []}})");
    CHECK(has_issue(lint(neg).errors, "BadLatency"));

    auto rule_bad = parse_ok(R"({"module_name": "m",
        "io": [{"name": "y", "dir": "output"}],
        "timing": {"outputs": {}},
        "functional_summary": {"overview": "", "rules":
          [{"id": "r", "kind": "boolean", "expression": "1", "outputs": ["nope"]}]}})");
    CHECK(has_issue(lint(rule_bad).errors, "UnknownSignal", "functional_summary.rules[0]"));
}

TEST_CASE("sequential contract with no clock is NoClockForSequential") {
    auto c = parse_ok(R"({"module_name": "m",
        "io": [{"name": "d", "dir": "input"}, {"name": "q", "dir": "output"}],
        "timing": {"outputs": {"q": {"latency_cycles": 1}}},
        "functional_summary": {"overview": "", "rules": []}})");
    CHECK(has_issue(lint(c).errors, "NoClockForSequential"));
}

TEST_CASE("clocking inferred from clk and rst_n ports") {
    auto c = parse_ok(R"({"module_name": "m",
        "io": [{"name": "clk", "dir": "input"}, {"name": "rst_n", "dir": "input"},
               {"name": "q", "dir": "output"}],
        "timing": {"outputs": {"q": {"latency_cycles": 1}}},
        "functional_summary": {"overview": "", "rules": []}})");
    auto report = lint(c);
    REQUIRE(report.errors.empty());
    CHECK(has_issue(report.warnings, "InferredClocking"));
    REQUIRE(report.canonical->clocking.has_value());
    CHECK(*report.canonical->clocking->clock->name == "clk");
    CHECK(*report.canonical->clocking->reset->name == "rst_n");
    CHECK(report.canonical->clocking->reset->active_enum() == ResetActive::Low);
}

TEST_CASE("purely combinational contract needs no clocking") {
    auto report = lint(parse_ok(kMinimal));
    CHECK(report.errors.empty());
    CHECK(!report.canonical->clocking.has_value());
}

TEST_CASE("inout ports are excluded from timing defaults") {
    auto c = parse_ok(R"({"module_name": "m",
        "io": [{"name": "pad", "dir": "inout", "width": 1}],
        "timing": {"outputs": {}},
        "functional_summary": {"overview": "", "rules": []}})");
    auto report = lint(c);
    REQUIRE(report.errors.empty());
    CHECK(!report.canonical->latency_of("pad").has_value());
    CHECK(!has_issue(report.warnings, "DefaultedLatency"));
}

TEST_CASE("render is deterministic and round-trips") {
    auto report = lint(parse_ok(kShiftRegister));
    REQUIRE(report.canonical.has_value());
    std::string once = render_contract(*report.canonical);
    std::string twice = render_contract(*report.canonical);
    CHECK(once == twice);
    auto back = parse_contract(once);
    REQUIRE(back.ok());
    CHECK(back.value() == *report.canonical);
}

TEST_CASE("parameters serialize after required sections") {
    auto c = parse_ok(R"({"module_name": "m", "parameters": [{"name": "W", "type": "int", "default": 4}],
        "io": [{"name": "y", "dir": "output", "width": 1}],
        "timing": {"outputs": {"y": {"latency_cycles": 0}}},
        "functional_summary": {"overview": "", "rules": []}})");
    auto report = lint(c);
    REQUIRE(report.canonical.has_value());
    std::string text = render_contract(*report.canonical);
    CHECK(text.find("\"functional_summary\"") < text.find("\"parameters\""));
}

TEST_CASE("lint is idempotent on random valid contracts") {
    std::mt19937 rng(7);
    for (int i = 0; i < 100; i++) {
        auto parsed = parse_contract(testgen::random_contract_json(rng));
        REQUIRE(parsed.ok());
        auto first = lint(parsed.value());
        REQUIRE_MESSAGE(first.errors.empty(), "generated contract must lint clean");
        auto second = lint(*first.canonical);
        CHECK(second.errors.empty());
        REQUIRE(second.canonical.has_value());
        CHECK(*second.canonical == *first.canonical);
        // round-trip on the canonical form
        auto back = parse_contract(render_contract(*first.canonical));
        REQUIRE(back.ok());
        CHECK(back.value() == *first.canonical);
    }
}
