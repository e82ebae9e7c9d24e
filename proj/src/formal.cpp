// SPDX-License-Identifier: Apache-2.0
#include "verisure/formal.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <regex>
#include <set>
#include <sstream>

#include "verisure/proc.hpp"
#include "verisure/util.hpp"
#include "verisure/verilog.hpp"

namespace verisure {

namespace {

bool is_stateful(const RtlBlock& b) {
    switch (b.kind) {
    case BlockKind::AlwaysFf:
    case BlockKind::AlwaysLatch:
    case BlockKind::ModuleInstance:
        return true;
    case BlockKind::AlwaysGeneric:
        return b.edge_triggered();
    default:
        return false;
    }
}

// True when the backward driver cone of `signal` contains any stateful block.
// Transitive on purpose: a combinational function of registered state is not
// provable as a pure function of the inputs.
bool sequentially_driven(const std::string& signal, const DependencyGraph& g) {
    std::set<int> seen_blocks;
    std::set<std::string> seen_sigs{signal};
    std::vector<std::string> frontier{signal};
    while (!frontier.empty()) {
        std::string sig = std::move(frontier.back());
        frontier.pop_back();
        auto it = g.driver_map.find(sig);
        if (it == g.driver_map.end()) continue;
        for (int id : it->second) {
            if (!seen_blocks.insert(id).second) continue;
            const RtlBlock* b = g.block_by_id(id);
            if (!b) continue;
            if (is_stateful(*b)) return true;
            for (const auto& r : b->reads)
                if (seen_sigs.insert(r).second) frontier.push_back(r);
        }
    }
    return false;
}

struct ResetValueMatch {
    std::string output;
    std::string constant;
};

// Mini-grammar for reset-value rules: `<reset> -> <output> == <const>` where
// <reset> may be negated for active-low names.
std::optional<ResetValueMatch> match_reset_value(const Rule& rule, const std::string& reset_name) {
    if (reset_name.empty() || !rule.expression) return std::nullopt;
    const std::string& expr = *rule.expression;
    size_t arrow = expr.find("->");
    if (arrow == std::string::npos) return std::nullopt;
    std::string lhs = trim(expr.substr(0, arrow));
    std::string rhs = trim(expr.substr(arrow + 2));
    if (lhs != reset_name && lhs != "!" + reset_name && lhs != "~" + reset_name)
        return std::nullopt;
    size_t eq = rhs.find("==");
    if (eq == std::string::npos) return std::nullopt;
    std::string out = trim(rhs.substr(0, eq));
    size_t val_at = eq + 2;
    if (val_at < rhs.size() && rhs[val_at] == '=') ++val_at; // tolerate ===
    std::string constant = trim(rhs.substr(val_at));
    if (!is_identifier(out) || constant.empty()) return std::nullopt;
    return ResetValueMatch{out, constant};
}

std::string rule_id_or(const Rule& rule, size_t index) {
    if (rule.id && !rule.id->empty()) return *rule.id;
    return "rule" + std::to_string(index);
}

std::string reset_active_expr(const DesignContract& c) {
    if (!c.clocking || !c.clocking->reset || !c.clocking->reset->name) return "";
    const ResetSpec& r = *c.clocking->reset;
    bool low = parse_reset_active(r.active.value_or("high")) == ResetActive::Low;
    return low ? "!" + *r.name : *r.name;
}

std::string port_decl(const std::string& dir, const std::string& name, int64_t width) {
    std::string d = "    " + dir + " logic ";
    if (width > 1) d += "[" + std::to_string(width - 1) + ":0] ";
    return d + name;
}

} // namespace

ObligationSet derive_obligations(const DesignContract& c, const DependencyGraph& g) {
    ObligationSet out;
    const std::string reset_name =
        c.clocking && c.clocking->reset && c.clocking->reset->name ? *c.clocking->reset->name : "";
    bool posedge_clock = true;
    if (c.clocking && c.clocking->clock && c.clocking->clock->edge)
        posedge_clock = parse_edge(*c.clocking->clock->edge) != ClockEdge::Negedge;

    static const std::vector<Rule> kNoRules;
    const std::vector<Rule>& rules =
        c.functional_summary ? c.functional_summary->rules : kNoRules;

    for (size_t i = 0; i < rules.size(); ++i) {
        const Rule& rule = rules[i];
        std::string id = rule_id_or(rule, i);
        auto kind = parse_rule_kind(rule.kind.value_or(""));
        if (rule.outputs.empty()) continue;
        if (kind == RuleKind::Sequential || !kind) {
            out.obligations.push_back({id, ObligationKind::Seq, rule.outputs, id});
            continue;
        }
        bool latency_zero = true;
        for (const auto& t : rule.outputs)
            latency_zero = latency_zero && c.latency_of(t).value_or(0) == 0;
        std::vector<std::string> seq_driven;
        for (const auto& t : rule.outputs)
            if (sequentially_driven(t, g)) seq_driven.push_back(t);
        if (latency_zero && seq_driven.empty()) {
            out.obligations.push_back({id, ObligationKind::Comb, rule.outputs, id});
        } else {
            out.obligations.push_back({id, ObligationKind::Seq, rule.outputs, id});
            for (const auto& t : seq_driven) {
                if (c.latency_of(t).value_or(0) != 0) continue;
                out.notes.push_back(make_error(
                    "DemotedToSeq",
                    "output " + t + " has latency 0 but a stateful driver cone; rule " + id +
                        " moved to sequential checking",
                    t));
            }
        }
    }

    const std::string stability_prefix =
        posedge_clock ? "NO_NEGEDGE_UPDATE_" : "NO_POSEDGE_UPDATE_";
    if (c.io) {
        for (const Port& p : *c.io) {
            if (!p.name || parse_dir(p.dir.value_or("")) != PortDir::Output) continue;
            if (c.latency_of(*p.name).value_or(0) < 1) continue;
            out.obligations.push_back({stability_prefix + *p.name,
                                       ObligationKind::Seq,
                                       {*p.name},
                                       "builtin:edge_stability"});
        }
    }

    for (size_t i = 0; i < rules.size(); ++i) {
        auto m = match_reset_value(rules[i], reset_name);
        if (!m) continue;
        out.obligations.push_back(
            {"RESET_VALUE_" + m->output, ObligationKind::Seq, {m->output}, "builtin:reset_value"});
    }
    return out;
}

std::vector<std::string> comb_targets(const ObligationSet& set) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const Obligation& ob : set.obligations) {
        if (ob.kind != ObligationKind::Comb) continue;
        for (const auto& t : ob.targets)
            if (seen.insert(t).second) out.push_back(t);
    }
    return out;
}

namespace {

// Strips an optional `<target> =` head so both equation-style and bare
// expressions are accepted. `=` only splits when it is not part of a
// two-character operator.
Result<std::string> rule_rhs(const std::string& expr, const std::string& target,
                             const std::string& rule_id) {
    for (size_t i = 0; i < expr.size(); ++i) {
        if (expr[i] != '=') continue;
        if (i + 1 < expr.size() && expr[i + 1] == '=') return std::string(trim(expr)); // ==
        if (i > 0 && (expr[i - 1] == '=' || expr[i - 1] == '!' || expr[i - 1] == '<' ||
                      expr[i - 1] == '>'))
            return std::string(trim(expr));
        std::string lhs = trim(expr.substr(0, i));
        if (lhs != target)
            return make_error("UnsupportedRule",
                              "rule " + rule_id + " assigns " + lhs + ", expected " + target,
                              rule_id);
        return std::string(trim(expr.substr(i + 1)));
    }
    return std::string(trim(expr));
}

} // namespace

Result<std::string> synthesize_spec(const DesignContract& c,
                                    const std::vector<std::string>& targets) {
    static const std::vector<Rule> kNoRules;
    const std::vector<Rule>& rules =
        c.functional_summary ? c.functional_summary->rules : kNoRules;

    std::set<std::string> input_names;
    std::vector<const Port*> inputs;
    if (c.io) {
        for (const Port& p : *c.io) {
            if (!p.name || parse_dir(p.dir.value_or("")) != PortDir::Input) continue;
            inputs.push_back(&p);
            input_names.insert(*p.name);
        }
    }
    std::set<std::string> param_names;
    if (c.parameters)
        for (const Parameter& p : *c.parameters) param_names.insert(p.name);

    struct Line {
        bool conditional;
        std::string target;
        std::string rhs;
    };
    std::vector<Line> body;

    for (const std::string& target : targets) {
        const Rule* found = nullptr;
        std::string found_id;
        for (size_t i = 0; i < rules.size(); ++i) {
            const Rule& rule = rules[i];
            auto kind = parse_rule_kind(rule.kind.value_or(""));
            if (kind != RuleKind::Boolean && kind != RuleKind::Conditional) continue;
            if (std::find(rule.outputs.begin(), rule.outputs.end(), target) ==
                rule.outputs.end())
                continue;
            if (found)
                return make_error("UnsupportedRule",
                                  "multiple combinational rules constrain " + target, target);
            found = &rule;
            found_id = rule_id_or(rule, i);
        }
        if (!found || !found->expression)
            return make_error("UnsupportedRule", "no combinational rule constrains " + target,
                              target);

        auto rhs = rule_rhs(*found->expression, target, found_id);
        if (!rhs.ok()) return rhs.error();

        auto toks = tokenize_verilog(rhs.value());
        if (!toks.ok())
            return make_error("UnsupportedRule",
                              "rule " + found_id + " is not a parseable expression: " +
                                  toks.error().message,
                              found_id);
        for (const Token& t : toks.value()) {
            if (t.kind == TokKind::SystemId)
                return make_error("UnsupportedRule",
                                  "rule " + found_id + " uses non-combinational construct " +
                                      t.text,
                                  found_id);
            if (t.kind == TokKind::Punct && t.text == "->")
                return make_error("UnsupportedRule",
                                  "rule " + found_id + " is an implication, not a function",
                                  found_id);
            if (t.kind != TokKind::Identifier) continue;
            if (is_verilog_keyword(t.text))
                return make_error("UnsupportedRule",
                                  "rule " + found_id + " uses non-combinational construct " +
                                      t.text,
                                  found_id);
            if (!input_names.count(t.text) && !param_names.count(t.text))
                return make_error("UnsupportedRule",
                                  "rule " + found_id + " references signal not in io: " + t.text,
                                  found_id);
        }
        bool conditional =
            parse_rule_kind(found->kind.value_or("")) == RuleKind::Conditional;
        body.push_back({conditional, target, rhs.value()});
    }

    std::string name = "spec_" + c.module_name.value_or("dut");
    std::ostringstream os;
    os << "// " << name << ": functional summary compiled to synthesizable form\n";
    os << "module " << name << " (\n";
    std::vector<std::string> decls;
    for (const Port* p : inputs) decls.push_back(port_decl("input", *p->name, p->width_or_default()));
    for (const std::string& t : targets) {
        int64_t w = 1;
        if (const Port* p = c.find_port(t)) w = p->width_or_default();
        decls.push_back(port_decl("output", t, w));
    }
    for (size_t i = 0; i < decls.size(); ++i)
        os << decls[i] << (i + 1 < decls.size() ? ",\n" : "\n");
    os << ");\n";
    if (c.parameters) {
        // Parameters referenced by rules keep their contract defaults.
        for (const Parameter& p : *c.parameters) {
            if (!p.default_value.is_number()) continue;
            os << "    localparam " << (p.type.empty() ? "int" : p.type) << " " << p.name
               << " = " << p.default_value.dump() << ";\n";
        }
    }
    for (const Line& line : body) {
        if (line.conditional) {
            os << "    always_comb begin\n";
            os << "        " << line.target << " = " << line.rhs << ";\n";
            os << "    end\n";
        } else {
            os << "    assign " << line.target << " = " << line.rhs << ";\n";
        }
    }
    os << "endmodule\n";
    return os.str();
}

Result<MiterBundle> build_miter(const DesignContract& c, const std::string& dut_source,
                                const std::string& spec_source,
                                const std::vector<std::string>& targets) {
    auto dut_file = analyze_rtl(dut_source);
    if (!dut_file.ok())
        return make_error("PortMismatch", "DUT source does not parse: " + dut_file.error().message);
    const ModuleDecl* dut_mod = nullptr;
    for (const ModuleDecl& m : dut_file.value().modules) {
        if (c.module_name && m.name == *c.module_name) {
            dut_mod = &m;
            break;
        }
        if (!dut_mod) dut_mod = &m;
    }
    if (!dut_mod) return make_error("PortMismatch", "DUT source declares no module");

    std::vector<std::string> inputs;
    if (c.io) {
        for (const Port& p : *c.io)
            if (p.name && parse_dir(p.dir.value_or("")) == PortDir::Input)
                inputs.push_back(*p.name);
    }

    std::map<std::string, PortDir> dut_ports;
    for (const ModulePort& p : dut_mod->ports) dut_ports[p.name] = p.dir;

    std::vector<std::string> problems;
    for (const std::string& in : inputs) {
        auto it = dut_ports.find(in);
        if (it == dut_ports.end())
            problems.push_back("DUT missing input port " + in);
        else if (it->second != PortDir::Input)
            problems.push_back("DUT port " + in + " is not an input");
    }
    for (const ModulePort& p : dut_mod->ports) {
        if (p.dir != PortDir::Input) continue;
        if (std::find(inputs.begin(), inputs.end(), p.name) == inputs.end())
            problems.push_back("DUT input port " + p.name + " not in contract io");
    }
    for (const std::string& t : targets) {
        auto it = dut_ports.find(t);
        if (it == dut_ports.end())
            problems.push_back("DUT missing output port " + t);
        else if (it->second != PortDir::Output)
            problems.push_back("DUT port " + t + " is not an output");
    }
    if (!problems.empty()) {
        std::string msg;
        for (size_t i = 0; i < problems.size(); ++i)
            msg += (i ? "; " : "") + problems[i];
        return make_error("PortMismatch", msg, dut_mod->name);
    }

    std::string spec_module = "spec_" + c.module_name.value_or("dut");
    std::smatch m;
    static const std::regex kModuleRe(R"(\bmodule\s+([A-Za-z_][A-Za-z0-9_$]*))");
    if (std::regex_search(spec_source, m, kModuleRe)) spec_module = m[1];

    auto width_of = [&](const std::string& name) -> int64_t {
        const Port* p = c.find_port(name);
        return p ? p->width_or_default() : 1;
    };

    std::ostringstream os;
    os << "// miter: " << dut_mod->name << " vs " << spec_module
       << " over shared inputs\n";
    os << "module miter (\n";
    for (size_t i = 0; i < inputs.size(); ++i)
        os << port_decl("input", inputs[i], width_of(inputs[i]))
           << (i + 1 < inputs.size() ? ",\n" : "\n");
    os << ");\n";
    for (const std::string& t : targets) {
        std::string range =
            width_of(t) > 1 ? "[" + std::to_string(width_of(t) - 1) + ":0] " : "";
        os << "    logic " << range << t << "_dut;\n";
        os << "    logic " << range << t << "_spec;\n";
    }
    auto emit_instance = [&](const std::string& mod, const std::string& inst,
                             const std::string& suffix) {
        os << "    " << mod << " " << inst << " (\n";
        std::vector<std::string> conns;
        for (const std::string& in : inputs) conns.push_back("." + in + "(" + in + ")");
        for (const std::string& t : targets) conns.push_back("." + t + "(" + t + suffix + ")");
        for (size_t i = 0; i < conns.size(); ++i)
            os << "        " << conns[i] << (i + 1 < conns.size() ? ",\n" : "\n");
        os << "    );\n";
    };
    emit_instance(dut_mod->name, "dut", "_dut");
    emit_instance(spec_module, "spec", "_spec");
    os << "    always @* begin\n";
    for (const std::string& t : targets)
        os << "        assert (" << t << "_dut === " << t << "_spec);\n";
    os << "    end\n";
    os << "endmodule\n";

    MiterBundle bundle;
    bundle.dut_source = dut_source;
    bundle.spec_source = spec_source;
    bundle.miter_source = os.str();
    bundle.inputs = inputs;
    bundle.targets = targets;
    bundle.dut_module = dut_mod->name;
    bundle.spec_module = spec_module;
    bundle.sby_config =
        "[options]\n"
        "mode prove\n"
        "\n"
        "[engines]\n"
        "smtbmc z3\n"
        "\n"
        "[script]\n"
        "read -formal -sv dut.sv\n"
        "read -formal -sv spec.sv\n"
        "read -formal -sv miter.sv\n"
        "prep -top miter\n"
        "\n"
        "[files]\n"
        "dut.sv\n"
        "spec.sv\n"
        "miter.sv\n";
    return bundle;
}

std::string to_string(ProofStatus s) {
    switch (s) {
    case ProofStatus::Proven: return "proven";
    case ProofStatus::Counterexample: return "counterexample";
    case ProofStatus::Inconclusive: return "inconclusive";
    case ProofStatus::ToolError: return "tool_error";
    }
    return "tool_error";
}

ProofStatus parse_proof_log(const std::string& text) {
    static const std::regex kDone(R"(DONE \((PASS|FAIL|TIMEOUT|ERROR|UNKNOWN))");
    std::smatch m;
    if (std::regex_search(text, m, kDone)) {
        std::string s = m[1];
        if (s == "PASS") return ProofStatus::Proven;
        if (s == "FAIL") return ProofStatus::Counterexample;
        if (s == "TIMEOUT") return ProofStatus::Inconclusive;
        if (s == "UNKNOWN") return ProofStatus::Inconclusive;
        return ProofStatus::ToolError;
    }
    if (text.find("TIMEOUT") != std::string::npos) return ProofStatus::Inconclusive;
    static const std::regex kFail(R"(\bFAIL(ED)?\b)");
    if (std::regex_search(text, kFail)) return ProofStatus::Counterexample;
    static const std::regex kPass(R"(\bPASS(ED)?\b)");
    if (std::regex_search(text, kPass)) return ProofStatus::Proven;
    return ProofStatus::ToolError;
}

std::map<std::string, FourStateValue> extract_witness(const VcdDatabase& db,
                                                      const std::vector<std::string>& inputs) {
    std::map<std::string, FourStateValue> witness;
    for (const std::string& name : inputs) {
        if (!db.has_signal(name)) continue;
        auto s = db.series(name);
        if (s.empty()) continue;
        const FourStateValue* pick = &s.back().second;
        for (const auto& [t, v] : s) {
            if (v.is_fully_defined()) {
                pick = &v;
                break;
            }
        }
        witness[name] = *pick;
    }
    return witness;
}

ProofResult run_proof(const MiterBundle& bundle, int timeout_seconds,
                      const std::string& work_dir) {
    namespace fs = std::filesystem;
    ProofResult result;
    if (!command_exists("sby")) {
        result.status = ProofStatus::ToolError;
        result.raw_log = "sby: not found on PATH; formal evidence skipped";
        return result;
    }
    std::string dir = work_dir;
    std::error_code ec;
    if (dir.empty()) {
        std::string tmpl = (fs::temp_directory_path(ec) / "verisure-formal-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) {
            result.raw_log = "cannot create scratch directory";
            return result;
        }
        dir = buf.data();
    } else {
        fs::create_directories(dir, ec);
    }
    bool wrote = write_file(dir + "/dut.sv", bundle.dut_source) &&
                 write_file(dir + "/spec.sv", bundle.spec_source) &&
                 write_file(dir + "/miter.sv", bundle.miter_source) &&
                 write_file(dir + "/miter.sby", bundle.sby_config);
    if (!wrote) {
        result.raw_log = "cannot write prover job under " + dir;
        return result;
    }
    auto run = run_process({"sby", "-f", "miter.sby"}, dir, timeout_seconds);
    if (!run.ok()) {
        result.raw_log = run.error().code + ": " + run.error().message;
        return result;
    }
    result.raw_log = run.value().output;
    if (run.value().timed_out) {
        result.status = ProofStatus::Inconclusive;
        return result;
    }
    result.status = parse_proof_log(result.raw_log);
    if (result.status != ProofStatus::Counterexample) return result;

    // The engine drops a trace VCD under the job directory; earliest defined
    // values of the shared inputs form the counterexample assignment.
    std::vector<std::string> vcds;
    fs::path job = fs::path(dir) / "miter";
    if (fs::exists(job, ec)) {
        for (auto it = fs::recursive_directory_iterator(job, ec);
             it != fs::recursive_directory_iterator(); it.increment(ec)) {
            if (ec) break;
            if (it->path().extension() == ".vcd") vcds.push_back(it->path().string());
        }
    }
    std::sort(vcds.begin(), vcds.end());
    auto pick = std::find_if(vcds.begin(), vcds.end(), [](const std::string& p) {
        return p.find("trace") != std::string::npos;
    });
    if (pick == vcds.end()) pick = vcds.begin();
    if (pick != vcds.end()) {
        if (auto data = read_file(*pick)) {
            auto db = parse_vcd(*data);
            if (db.ok()) result.witness = extract_witness(db.value(), bundle.inputs);
        }
    }
    return result;
}

Result<AssertionEmission> emit_assertions(const DesignContract& c,
                                          const ObligationSet& obligations) {
    if (!c.clocking || !c.clocking->clock || !c.clocking->clock->name)
        return make_error("NoClock",
                          "contract declares no clock; sequential assertions skipped");
    const std::string clk = *c.clocking->clock->name;
    bool posedge_clock = parse_edge(c.clocking->clock->edge.value_or("posedge")) !=
                         ClockEdge::Negedge;
    const std::string active = posedge_clock ? "posedge" : "negedge";
    const std::string inactive = posedge_clock ? "negedge" : "posedge";
    const std::string rst_active = reset_active_expr(c);
    const std::string rst_name =
        c.clocking->reset && c.clocking->reset->name ? *c.clocking->reset->name : "";

    const std::string reset_name_for_rules = rst_name;
    static const std::vector<Rule> kNoRules;
    const std::vector<Rule>& rules =
        c.functional_summary ? c.functional_summary->rules : kNoRules;
    auto reset_constant_for = [&](const std::string& target) -> std::optional<std::string> {
        for (const Rule& r : rules) {
            auto m = match_reset_value(r, reset_name_for_rules);
            if (m && m->output == target) return m->constant;
        }
        return std::nullopt;
    };

    AssertionEmission out;
    out.checker_module = "verisure_checker_" + c.module_name.value_or("dut");

    // Checker ports: clock, reset, then every templated signal in io order.
    std::set<std::string> checked;
    for (const Obligation& ob : obligations.obligations) {
        if (ob.kind != ObligationKind::Seq) continue;
        if (ob.source_rule != "builtin:edge_stability" && ob.source_rule != "builtin:reset_value")
            continue;
        for (const auto& t : ob.targets) checked.insert(t);
    }
    std::vector<std::pair<std::string, int64_t>> signal_ports;
    if (c.io) {
        for (const Port& p : *c.io)
            if (p.name && checked.count(*p.name))
                signal_ports.emplace_back(*p.name, p.width_or_default());
    }
    for (const auto& name : checked) {
        bool have = false;
        for (const auto& [n, w] : signal_ports) have = have || n == name;
        if (!have) signal_ports.emplace_back(name, 1);
    }

    std::ostringstream os;
    os << "// " << out.checker_module << ": bound alongside the DUT, no edits inside it\n";
    os << "module " << out.checker_module << " (\n";
    std::vector<std::string> decls;
    decls.push_back(port_decl("input", clk, 1));
    if (!rst_name.empty()) decls.push_back(port_decl("input", rst_name, 1));
    for (const auto& [name, width] : signal_ports) decls.push_back(port_decl("input", name, width));
    for (size_t i = 0; i < decls.size(); ++i)
        os << decls[i] << (i + 1 < decls.size() ? ",\n" : "\n");
    os << ");\n";

    const std::string guard = rst_active.empty() ? "1'b0" : rst_active;
    for (const Obligation& ob : obligations.obligations) {
        if (ob.kind != ObligationKind::Seq) continue;
        if (ob.source_rule == "builtin:edge_stability") {
            const std::string& sig = ob.targets.front();
            int64_t w = 1;
            for (const auto& [n, wd] : signal_ports)
                if (n == sig) w = wd;
            std::string range = w > 1 ? "[" + std::to_string(w - 1) + ":0] " : "";
            os << "\n";
            os << "    // " << ob.id << ": " << sig << " must hold steady across the "
               << inactive << " of " << clk << "\n";
            os << "    logic " << range << sig << "_prev;\n";
            os << "    logic " << sig << "_prev_valid = 1'b0;\n";
            os << "    time " << sig << "_edge_time;\n";
            os << "    always @(" << inactive << " " << clk << ") begin\n";
            os << "        " << sig << "_prev <= " << sig << ";\n";
            os << "        " << sig << "_edge_time <= $time;\n";
            os << "        " << sig << "_prev_valid <= !(" << guard << ");\n";
            os << "    end\n";
            os << "    always @(" << active << " " << clk << ") begin\n";
            os << "        if (" << sig << "_prev_valid && !(" << guard << ")) begin\n";
            os << "            if (!(" << sig << " === " << sig << "_prev)) begin\n";
            os << "                $display(\"ASSERT_VIOLATION name=" << ob.id
               << " time=%0d sig=" << sig << " prev=0x%h now=0x%h\", " << sig << "_edge_time, "
               << sig << "_prev, " << sig << ");\n";
            os << "            end\n";
            os << "        end\n";
            os << "    end\n";
        } else if (ob.source_rule == "builtin:reset_value") {
            const std::string& sig = ob.targets.front();
            auto constant = reset_constant_for(sig);
            if (!constant || rst_active.empty()) {
                out.notes.push_back("obligation " + ob.id + " skipped: no reset value resolvable");
                continue;
            }
            int64_t w = 1;
            for (const auto& [n, wd] : signal_ports)
                if (n == sig) w = wd;
            os << "\n";
            os << "    // " << ob.id << ": " << sig << " must read " << *constant
               << " while reset is asserted\n";
            os << "    logic " << sig << "_rst_seen = 1'b0;\n";
            os << "    always @(" << active << " " << clk << ") begin\n";
            os << "        if (" << sig << "_rst_seen && (" << rst_active << ")) begin\n";
            os << "            if (!(" << sig << " === " << *constant << ")) begin\n";
            os << "                $display(\"ASSERT_VIOLATION name=" << ob.id
               << " time=%0d sig=" << sig << " expected=0x%h got=0x%h\", $time, " << w << "'("
               << *constant << "), " << sig << ");\n";
            os << "            end\n";
            os << "        end\n";
            os << "        " << sig << "_rst_seen <= (" << rst_active << ");\n";
            os << "    end\n";
        } else {
            os << "\n    // obligation " << ob.id << " (rule " << ob.source_rule
               << ") delegated to generated assertions\n";
            out.notes.push_back("obligation " + ob.id + " (rule " + ob.source_rule +
                                ") delegated to generated assertions");
        }
    }
    os << "endmodule\n";
    out.checker_source = os.str();

    std::ostringstream bos;
    bos << "// attaches " << out.checker_module << " without touching the DUT\n";
    bos << "bind " << c.module_name.value_or("dut") << " " << out.checker_module << " "
        << out.checker_module << "_i (\n";
    std::vector<std::string> conns;
    conns.push_back("." + clk + "(" + clk + ")");
    if (!rst_name.empty()) conns.push_back("." + rst_name + "(" + rst_name + ")");
    for (const auto& [name, width] : signal_ports) conns.push_back("." + name + "(" + name + ")");
    for (size_t i = 0; i < conns.size(); ++i)
        bos << "    " << conns[i] << (i + 1 < conns.size() ? ",\n" : "\n");
    bos << ");\n";
    out.bind_source = bos.str();
    return out;
}

std::vector<AssertionViolation> parse_violations(const std::string& sim_log,
                                                 std::vector<Error>* warnings) {
    static const std::regex kViol(R"(ASSERT_VIOLATION\s+name=(\S+)\s+time=(\d+)\s*(.*))");
    std::vector<AssertionViolation> out;
    for (const std::string& line : split_lines(sim_log)) {
        if (line.find("ASSERT_VIOLATION") == std::string::npos) continue;
        std::smatch m;
        if (!std::regex_search(line, m, kViol)) {
            if (warnings)
                warnings->push_back(
                    make_error("BadViolationLine", "unparseable violation line", trim(line)));
            continue;
        }
        AssertionViolation v;
        v.name = m[1];
        v.time = std::strtoull(m[2].str().c_str(), nullptr, 10);
        v.message = trim(line);
        std::istringstream rest(m[3].str());
        std::string tok;
        while (rest >> tok) {
            size_t eq = tok.find('=');
            if (eq == std::string::npos || eq == 0) continue;
            v.implicated.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
        }
        out.push_back(std::move(v));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const AssertionViolation& a, const AssertionViolation& b) {
                         return a.time < b.time;
                     });
    return out;
}

} // namespace verisure
