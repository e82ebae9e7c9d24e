// SPDX-License-Identifier: Apache-2.0
#include "verisure/contract.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "verisure/util.hpp"

namespace verisure {

std::optional<PortDir> parse_dir(std::string_view s) {
    if (s == "input") return PortDir::Input;
    if (s == "output") return PortDir::Output;
    if (s == "inout") return PortDir::Inout;
    return std::nullopt;
}

std::optional<ClockEdge> parse_edge(std::string_view s) {
    if (s == "posedge") return ClockEdge::Posedge;
    if (s == "negedge") return ClockEdge::Negedge;
    return std::nullopt;
}

std::optional<ResetActive> parse_reset_active(std::string_view s) {
    if (s == "high") return ResetActive::High;
    if (s == "low") return ResetActive::Low;
    return std::nullopt;
}

std::optional<ResetKind> parse_reset_kind(std::string_view s) {
    if (s == "sync") return ResetKind::Sync;
    if (s == "async") return ResetKind::Async;
    return std::nullopt;
}

std::optional<RuleKind> parse_rule_kind(std::string_view s) {
    if (s == "boolean") return RuleKind::Boolean;
    if (s == "conditional") return RuleKind::Conditional;
    if (s == "sequential") return RuleKind::Sequential;
    return std::nullopt;
}

const Port* DesignContract::find_port(std::string_view name) const {
    if (!io) return nullptr;
    for (const auto& p : *io) {
        if (p.name && *p.name == name) return &p;
    }
    return nullptr;
}

std::optional<int64_t> DesignContract::latency_of(std::string_view output) const {
    if (!timing) return std::nullopt;
    for (const auto& e : timing->outputs) {
        if (e.output == output && e.latency_cycles) return e.latency_cycles;
    }
    return std::nullopt;
}

namespace {

struct TypeError {
    std::string path;
    std::string expected;
};

// Throwing a local type keeps the field walkers flat; parse_contract converts
// it to ParseError::Type at the boundary.
void require(bool ok, const std::string& path, const char* expected) {
    if (!ok) throw TypeError{path, expected};
}

std::string get_string(const Json& j, const std::string& path) {
    require(j.is_string(), path, "string");
    return j.get<std::string>();
}

int64_t get_int(const Json& j, const std::string& path) {
    require(j.is_number_integer(), path, "integer");
    return j.get<int64_t>();
}

Port parse_port(const Json& j, const std::string& path) {
    require(j.is_object(), path, "object");
    Port p;
    if (j.contains("name")) p.name = get_string(j["name"], path + ".name");
    if (j.contains("dir")) p.dir = get_string(j["dir"], path + ".dir");
    if (j.contains("width")) p.width = get_int(j["width"], path + ".width");
    if (j.contains("description"))
        p.description = get_string(j["description"], path + ".description");
    return p;
}

ClockingSpec parse_clocking(const Json& j) {
    require(j.is_object(), "clocking", "object");
    ClockingSpec c;
    if (j.contains("clock")) {
        const Json& jc = j["clock"];
        require(jc.is_object(), "clocking.clock", "object");
        ClockSpec clock;
        if (jc.contains("name")) clock.name = get_string(jc["name"], "clocking.clock.name");
        if (jc.contains("edge")) clock.edge = get_string(jc["edge"], "clocking.clock.edge");
        c.clock = clock;
    }
    if (j.contains("reset")) {
        const Json& jr = j["reset"];
        require(jr.is_object(), "clocking.reset", "object");
        ResetSpec reset;
        if (jr.contains("name")) reset.name = get_string(jr["name"], "clocking.reset.name");
        if (jr.contains("active"))
            reset.active = get_string(jr["active"], "clocking.reset.active");
        if (jr.contains("kind")) reset.kind = get_string(jr["kind"], "clocking.reset.kind");
        c.reset = reset;
    }
    return c;
}

TimingSection parse_timing(const Json& j) {
    require(j.is_object(), "timing", "object");
    TimingSection t;
    if (!j.contains("outputs")) return t;
    const Json& jo = j["outputs"];
    require(jo.is_object(), "timing.outputs", "object");
    t.outputs_present = true;
    for (auto it = jo.begin(); it != jo.end(); ++it) {
        const std::string path = "timing.outputs." + it.key();
        require(it.value().is_object(), path, "object");
        TimingEntry e;
        e.output = it.key();
        if (it.value().contains("latency_cycles"))
            e.latency_cycles = get_int(it.value()["latency_cycles"], path + ".latency_cycles");
        t.outputs.push_back(std::move(e));
    }
    return t;
}

FunctionalSummary parse_summary(const Json& j) {
    require(j.is_object(), "functional_summary", "object");
    FunctionalSummary f;
    if (j.contains("overview"))
        f.overview = get_string(j["overview"], "functional_summary.overview");
    if (j.contains("rules")) {
        const Json& jr = j["rules"];
        require(jr.is_array(), "functional_summary.rules", "array");
        for (size_t i = 0; i < jr.size(); i++) {
            const std::string path = "functional_summary.rules[" + std::to_string(i) + "]";
            require(jr[i].is_object(), path, "object");
            Rule r;
            if (jr[i].contains("id")) r.id = get_string(jr[i]["id"], path + ".id");
            if (jr[i].contains("kind")) r.kind = get_string(jr[i]["kind"], path + ".kind");
            if (jr[i].contains("expression"))
                r.expression = get_string(jr[i]["expression"], path + ".expression");
            if (jr[i].contains("outputs")) {
                const Json& jo = jr[i]["outputs"];
                require(jo.is_array(), path + ".outputs", "array");
                for (size_t k = 0; k < jo.size(); k++) {
                    r.outputs.push_back(
                        get_string(jo[k], path + ".outputs[" + std::to_string(k) + "]"));
                }
            }
            f.rules.push_back(std::move(r));
        }
    }
    return f;
}

std::vector<Parameter> parse_parameters(const Json& j) {
    require(j.is_array(), "parameters", "array");
    std::vector<Parameter> out;
    for (size_t i = 0; i < j.size(); i++) {
        const std::string path = "parameters[" + std::to_string(i) + "]";
        require(j[i].is_object(), path, "object");
        Parameter p;
        if (j[i].contains("name")) p.name = get_string(j[i]["name"], path + ".name");
        if (j[i].contains("type")) p.type = get_string(j[i]["type"], path + ".type");
        if (j[i].contains("default")) p.default_value = j[i]["default"];
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::string> parse_test_plan(const Json& j) {
    require(j.is_array(), "test_plan", "array");
    std::vector<std::string> out;
    for (size_t i = 0; i < j.size(); i++) {
        out.push_back(get_string(j[i], "test_plan[" + std::to_string(i) + "]"));
    }
    return out;
}

} // namespace

Result<DesignContract> parse_contract(const std::string& raw) {
    Json root = Json::parse(raw, nullptr, false);
    if (root.is_discarded()) {
        return make_error("ParseError::Json", "input is not valid JSON");
    }
    if (!root.is_object()) {
        return make_error("ParseError::Type", "contract root must be a JSON object");
    }

    DesignContract c;
    try {
        for (auto it = root.begin(); it != root.end(); ++it) {
            const std::string& key = it.key();
            const Json& v = it.value();
            if (key == "module_name") {
                c.module_name = get_string(v, "module_name");
            } else if (key == "io") {
                require(v.is_array(), "io", "array");
                std::vector<Port> ports;
                for (size_t i = 0; i < v.size(); i++) {
                    ports.push_back(parse_port(v[i], "io[" + std::to_string(i) + "]"));
                }
                c.io = std::move(ports);
            } else if (key == "clocking") {
                c.clocking = parse_clocking(v);
            } else if (key == "timing") {
                c.timing = parse_timing(v);
            } else if (key == "functional_summary") {
                c.functional_summary = parse_summary(v);
            } else if (key == "parameters") {
                c.parameters = parse_parameters(v);
            } else if (key == "test_plan") {
                c.test_plan = parse_test_plan(v);
            } else {
                c.extensions[key] = v;
            }
        }
    } catch (const TypeError& te) {
        return make_error("ParseError::Type",
                          "expected " + te.expected + " at " + te.path, te.path);
    }
    return c;
}

namespace {

struct Linter {
    const DesignContract& c;
    LintReport report;

    void error(std::string code, std::string message, std::string path) {
        report.errors.push_back({std::move(code), std::move(message), std::move(path)});
    }
    void warn(std::string code, std::string message, std::string path) {
        report.warnings.push_back({std::move(code), std::move(message), std::move(path)});
    }

    bool port_exists(std::string_view name) const { return c.find_port(name) != nullptr; }

    void check_sections() {
        if (!c.module_name) error("SchemaMissingKey", "missing required key module_name", "module_name");
        if (!c.io) error("SchemaMissingKey", "missing required key io", "io");
        if (!c.timing) {
            error("SchemaMissingKey", "missing required key timing", "timing");
        } else if (!c.timing->outputs_present) {
            error("SchemaMissingKey", "missing required key timing.outputs", "timing.outputs");
        }
        if (!c.functional_summary) {
            error("SchemaMissingKey", "missing required key functional_summary",
                  "functional_summary");
        }
        if (c.module_name && !is_identifier(*c.module_name)) {
            error("BadIdentifier", "module_name '" + *c.module_name + "' is not a legal identifier",
                  "module_name");
        }
    }

    void check_ports() {
        if (!c.io) return;
        std::set<std::string> seen;
        for (size_t i = 0; i < c.io->size(); i++) {
            const Port& p = (*c.io)[i];
            const std::string path = "io[" + std::to_string(i) + "]";
            if (!p.name) {
                error("SchemaMissingKey", "port entry missing name", path + ".name");
            } else {
                if (!is_identifier(*p.name)) {
                    error("BadIdentifier", "port name '" + *p.name + "' is not a legal identifier",
                          path + ".name");
                }
                if (!seen.insert(*p.name).second) {
                    error("DuplicatePort", "port '" + *p.name + "' declared more than once",
                          path + ".name");
                }
            }
            if (!p.dir) {
                error("SchemaMissingKey", "port entry missing dir", path + ".dir");
            } else if (!parse_dir(*p.dir)) {
                error("BadEnum", "dir '" + *p.dir + "' is not one of input/output/inout",
                      path + ".dir");
            }
            if (p.width && *p.width < 1) {
                error("BadWidth", "width " + std::to_string(*p.width) + " must be >= 1",
                      path + ".width");
            }
        }
    }

    void check_timing() {
        if (!c.timing || !c.timing->outputs_present) return;
        for (const auto& e : c.timing->outputs) {
            const std::string path = "timing.outputs." + e.output;
            const Port* p = c.find_port(e.output);
            const bool drives_output =
                p && p->dir && parse_dir(*p->dir) && *parse_dir(*p->dir) != PortDir::Input;
            if (c.io && !drives_output) {
                error("UnknownSignal", "timing entry '" + e.output + "' does not name an output port",
                      path);
            }
            if (!e.latency_cycles) {
                error("SchemaMissingKey", "timing entry missing latency_cycles",
                      path + ".latency_cycles");
            } else if (*e.latency_cycles < 0) {
                error("BadLatency",
                      "latency_cycles " + std::to_string(*e.latency_cycles) + " must be >= 0", path);
            }
        }
    }

    void check_clocking_explicit() {
        if (!c.clocking) return;
        const ClockingSpec& cl = *c.clocking;
        if (!cl.clock) {
            error("SchemaMissingKey", "clocking present but missing clock", "clocking.clock");
        } else {
            if (!cl.clock->name) {
                error("SchemaMissingKey", "clock missing name", "clocking.clock.name");
            } else if (c.io && !port_exists(*cl.clock->name)) {
                error("UnknownSignal", "clock '" + *cl.clock->name + "' is not declared in io",
                      "clocking.clock.name");
            }
            if (!cl.clock->edge) {
                error("SchemaMissingKey", "clock missing edge", "clocking.clock.edge");
            } else if (!parse_edge(*cl.clock->edge)) {
                error("BadEnum", "edge '" + *cl.clock->edge + "' is not posedge/negedge",
                      "clocking.clock.edge");
            }
        }
        if (cl.reset) {
            if (!cl.reset->name) {
                error("SchemaMissingKey", "reset missing name", "clocking.reset.name");
            } else if (c.io && !port_exists(*cl.reset->name)) {
                error("UnknownSignal", "reset '" + *cl.reset->name + "' is not declared in io",
                      "clocking.reset.name");
            }
            if (!cl.reset->active) {
                error("SchemaMissingKey", "reset missing active", "clocking.reset.active");
            } else if (!parse_reset_active(*cl.reset->active)) {
                error("BadEnum", "active '" + *cl.reset->active + "' is not high/low",
                      "clocking.reset.active");
            }
            if (!cl.reset->kind) {
                error("SchemaMissingKey", "reset missing kind", "clocking.reset.kind");
            } else if (!parse_reset_kind(*cl.reset->kind)) {
                error("BadEnum", "kind '" + *cl.reset->kind + "' is not sync/async",
                      "clocking.reset.kind");
            }
        }
    }

    void check_rules() {
        if (!c.functional_summary) return;
        const auto& rules = c.functional_summary->rules;
        for (size_t i = 0; i < rules.size(); i++) {
            const Rule& r = rules[i];
            const std::string path = "functional_summary.rules[" + std::to_string(i) + "]";
            if (!r.id) error("SchemaMissingKey", "rule missing id", path + ".id");
            if (!r.kind) {
                error("SchemaMissingKey", "rule missing kind", path + ".kind");
            } else if (!parse_rule_kind(*r.kind)) {
                error("BadEnum", "kind '" + *r.kind + "' is not boolean/conditional/sequential",
                      path + ".kind");
            }
            if (!r.expression)
                error("SchemaMissingKey", "rule missing expression", path + ".expression");
            for (size_t k = 0; k < r.outputs.size(); k++) {
                const Port* p = c.find_port(r.outputs[k]);
                const bool drives_output =
                    p && p->dir && parse_dir(*p->dir) && *parse_dir(*p->dir) != PortDir::Input;
                if (c.io && !drives_output) {
                    error("UnknownSignal",
                          "rule output '" + r.outputs[k] + "' is not an output port",
                          path + ".outputs[" + std::to_string(k) + "]");
                }
            }
        }
    }

    bool sequential_implied() const {
        if (c.timing) {
            for (const auto& e : c.timing->outputs) {
                if (e.latency_cycles && *e.latency_cycles > 0) return true;
            }
        }
        if (c.functional_summary) {
            for (const auto& r : c.functional_summary->rules) {
                if (r.kind && parse_rule_kind(*r.kind) == RuleKind::Sequential) return true;
            }
        }
        return false;
    }

    // Inference lexicon is fixed: clk / rst / rst_n, with rst_n active-low.
    // Edge defaults to posedge, reset kind to sync; the warning records the
    // full assumption so nothing is invented silently.
    std::optional<ClockingSpec> infer_clocking() {
        if (!c.io) return std::nullopt;
        const Port* clk = c.find_port("clk");
        if (!clk || !clk->dir || parse_dir(*clk->dir) != PortDir::Input) return std::nullopt;

        ClockingSpec spec;
        spec.clock = ClockSpec{std::string("clk"), std::string("posedge")};
        std::string note = "inferred clock clk (posedge)";
        const Port* rst = c.find_port("rst");
        const Port* rst_n = c.find_port("rst_n");
        if (rst && rst->dir && parse_dir(*rst->dir) == PortDir::Input) {
            spec.reset = ResetSpec{std::string("rst"), std::string("high"), std::string("sync")};
            note += ", reset rst (active-high, sync)";
        } else if (rst_n && rst_n->dir && parse_dir(*rst_n->dir) == PortDir::Input) {
            spec.reset = ResetSpec{std::string("rst_n"), std::string("low"), std::string("sync")};
            note += ", reset rst_n (active-low, sync)";
        }
        warn("InferredClocking", note + " from standard port names", "clocking");
        return spec;
    }

    void run() {
        check_sections();
        check_ports();
        check_timing();
        check_clocking_explicit();
        check_rules();

        std::optional<ClockingSpec> clocking = c.clocking;
        if (!c.clocking && sequential_implied()) {
            clocking = infer_clocking();
            if (!clocking) {
                error("NoClockForSequential",
                      "contract implies sequential behavior but no clocking is given or inferable",
                      "clocking");
            }
        } else if (!c.clocking) {
            // Purely combinational contracts may still carry a clk port; infer
            // quietly usable clocking only when sequential semantics demand it.
        }

        if (!report.errors.empty()) return;
        canonicalize(std::move(clocking));
    }

    void canonicalize(std::optional<ClockingSpec> clocking) {
        DesignContract canon;
        canon.module_name = c.module_name;
        canon.clocking = std::move(clocking);
        canon.parameters = c.parameters;
        canon.test_plan = c.test_plan;
        canon.extensions = c.extensions;

        std::vector<Port> ports = *c.io;
        for (size_t i = 0; i < ports.size(); i++) {
            if (!ports[i].width) {
                ports[i].width = 1;
                warn("DefaultedWidth", "port '" + *ports[i].name + "' given default width 1",
                     "io[" + std::to_string(i) + "].width");
            }
        }
        canon.io = std::move(ports);

        // Canonical timing is keyed in io order; inout ports never receive a
        // defaulted entry but keep an explicit one.
        TimingSection timing;
        timing.outputs_present = true;
        for (const auto& p : *canon.io) {
            const auto existing = c.latency_of(*p.name);
            if (existing) {
                timing.outputs.push_back({*p.name, existing});
                continue;
            }
            if (p.dir_enum() == PortDir::Output) {
                timing.outputs.push_back({*p.name, 0});
                warn("DefaultedLatency", "output '" + *p.name + "' defaulted to latency_cycles 0",
                     "timing.outputs." + *p.name);
            }
        }
        canon.timing = std::move(timing);
        canon.functional_summary = c.functional_summary;

        report.canonical = std::move(canon);
    }
};

} // namespace

LintReport lint(const DesignContract& c) {
    Linter linter{c, {}};
    linter.run();
    return std::move(linter.report);
}

std::string render_contract(const DesignContract& c) {
    Json root = Json::object();
    if (c.module_name) root["module_name"] = *c.module_name;
    if (c.io) {
        Json io = Json::array();
        for (const auto& p : *c.io) {
            Json jp = Json::object();
            if (p.name) jp["name"] = *p.name;
            if (p.dir) jp["dir"] = *p.dir;
            if (p.width) jp["width"] = *p.width;
            jp["description"] = p.description;
            io.push_back(std::move(jp));
        }
        root["io"] = std::move(io);
    }
    if (c.clocking) {
        Json jc = Json::object();
        if (c.clocking->clock) {
            Json clk = Json::object();
            if (c.clocking->clock->name) clk["name"] = *c.clocking->clock->name;
            if (c.clocking->clock->edge) clk["edge"] = *c.clocking->clock->edge;
            jc["clock"] = std::move(clk);
        }
        if (c.clocking->reset) {
            Json rst = Json::object();
            if (c.clocking->reset->name) rst["name"] = *c.clocking->reset->name;
            if (c.clocking->reset->active) rst["active"] = *c.clocking->reset->active;
            if (c.clocking->reset->kind) rst["kind"] = *c.clocking->reset->kind;
            jc["reset"] = std::move(rst);
        }
        root["clocking"] = std::move(jc);
    }
    if (c.timing) {
        Json outs = Json::object();
        for (const auto& e : c.timing->outputs) {
            Json entry = Json::object();
            if (e.latency_cycles) entry["latency_cycles"] = *e.latency_cycles;
            outs[e.output] = std::move(entry);
        }
        Json jt = Json::object();
        jt["outputs"] = std::move(outs);
        root["timing"] = std::move(jt);
    }
    if (c.functional_summary) {
        Json jf = Json::object();
        jf["overview"] = c.functional_summary->overview;
        Json rules = Json::array();
        for (const auto& r : c.functional_summary->rules) {
            Json jr = Json::object();
            if (r.id) jr["id"] = *r.id;
            if (r.kind) jr["kind"] = *r.kind;
            if (r.expression) jr["expression"] = *r.expression;
            jr["outputs"] = r.outputs;
            rules.push_back(std::move(jr));
        }
        jf["rules"] = std::move(rules);
        root["functional_summary"] = std::move(jf);
    }
    if (c.parameters) {
        Json jp = Json::array();
        for (const auto& p : *c.parameters) {
            Json e = Json::object();
            e["name"] = p.name;
            e["type"] = p.type;
            e["default"] = p.default_value;
            jp.push_back(std::move(e));
        }
        root["parameters"] = std::move(jp);
    }
    if (c.test_plan) root["test_plan"] = *c.test_plan;
    for (auto it = c.extensions.begin(); it != c.extensions.end(); ++it) {
        root[it.key()] = it.value();
    }
    return root.dump(2) + "\n";
}

} // namespace verisure
