// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "verisure/common.hpp"

namespace verisure {

using Json = nlohmann::ordered_json;

enum class PortDir { Input, Output, Inout };
enum class ClockEdge { Posedge, Negedge };
enum class ResetActive { High, Low };
enum class ResetKind { Sync, Async };
enum class RuleKind { Boolean, Conditional, Sequential };

std::optional<PortDir> parse_dir(std::string_view s);
std::optional<ClockEdge> parse_edge(std::string_view s);
std::optional<ResetActive> parse_reset_active(std::string_view s);
std::optional<ResetKind> parse_reset_kind(std::string_view s);
std::optional<RuleKind> parse_rule_kind(std::string_view s);

/// Enum-valued fields are stored as raw strings so that a contract with an
/// illegal enum can still be represented; lint reports BadEnum on them.
/// Accessors like dir_enum() are only meaningful on lint-clean contracts.
struct Port {
    std::optional<std::string> name;
    std::optional<std::string> dir;
    std::optional<int64_t> width;
    std::string description;

    PortDir dir_enum() const { return *parse_dir(dir.value_or("")); }
    int64_t width_or_default() const { return width.value_or(1); }

    bool operator==(const Port&) const = default;
};

struct ClockSpec {
    std::optional<std::string> name;
    std::optional<std::string> edge;

    ClockEdge edge_enum() const { return *parse_edge(edge.value_or("")); }

    bool operator==(const ClockSpec&) const = default;
};

struct ResetSpec {
    std::optional<std::string> name;
    std::optional<std::string> active;
    std::optional<std::string> kind;

    ResetActive active_enum() const { return *parse_reset_active(active.value_or("")); }
    ResetKind kind_enum() const { return *parse_reset_kind(kind.value_or("")); }

    bool operator==(const ResetSpec&) const = default;
};

struct ClockingSpec {
    std::optional<ClockSpec> clock;
    std::optional<ResetSpec> reset;

    bool operator==(const ClockingSpec&) const = default;
};

struct TimingEntry {
    std::string output;
    std::optional<int64_t> latency_cycles;

    bool operator==(const TimingEntry&) const = default;
};

/// `outputs_present` distinguishes `"timing": {}` from `"timing": {"outputs": {...}}`.
struct TimingSection {
    bool outputs_present = false;
    std::vector<TimingEntry> outputs;

    bool operator==(const TimingSection&) const = default;
};

struct Rule {
    std::optional<std::string> id;
    std::optional<std::string> kind;
    std::optional<std::string> expression;
    std::vector<std::string> outputs;

    RuleKind kind_enum() const { return *parse_rule_kind(kind.value_or("")); }

    bool operator==(const Rule&) const = default;
};

struct FunctionalSummary {
    std::string overview;
    std::vector<Rule> rules;

    bool operator==(const FunctionalSummary&) const = default;
};

struct Parameter {
    std::string name;
    std::string type;
    Json default_value;

    bool operator==(const Parameter&) const = default;
};

/// Required sections are optional here because lint, not parse, reports their
/// absence. Unknown top-level keys survive in `extensions` in file order.
struct DesignContract {
    std::optional<std::string> module_name;
    std::optional<std::vector<Port>> io;
    std::optional<ClockingSpec> clocking;
    std::optional<TimingSection> timing;
    std::optional<FunctionalSummary> functional_summary;
    std::optional<std::vector<Parameter>> parameters;
    std::optional<std::vector<std::string>> test_plan;
    Json extensions = Json::object();

    const Port* find_port(std::string_view name) const;
    std::optional<int64_t> latency_of(std::string_view output) const;

    bool operator==(const DesignContract&) const = default;
};

struct LintIssue {
    std::string code;
    std::string message;
    std::string path;

    bool operator==(const LintIssue&) const = default;
};

struct LintReport {
    std::vector<LintIssue> errors;
    std::vector<LintIssue> warnings;
    std::optional<DesignContract> canonical;

    bool clean() const { return errors.empty(); }
};

Result<DesignContract> parse_contract(const std::string& raw);
LintReport lint(const DesignContract& c);
std::string render_contract(const DesignContract& c);

} // namespace verisure
