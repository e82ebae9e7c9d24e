// SPDX-License-Identifier: Apache-2.0
#include "verisure/rtl_graph.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <unordered_set>

#include "verisure/util.hpp"

namespace verisure {

std::string to_string(BlockKind k) {
    switch (k) {
        case BlockKind::AlwaysFf: return "always_ff";
        case BlockKind::AlwaysComb: return "always_comb";
        case BlockKind::AlwaysLatch: return "always_latch";
        case BlockKind::AlwaysGeneric: return "always_generic";
        case BlockKind::ContinuousAssign: return "continuous_assign";
        case BlockKind::ModuleInstance: return "module_instance";
    }
    return "unknown";
}

namespace {

struct ParseFail {
    std::string message;
    int line;
    int col;
};

bool is_net_type(std::string_view w) {
    static const std::unordered_set<std::string_view> nets = {
        "wire", "tri", "tri0", "tri1", "triand", "trior", "trireg",
        "wand", "wor", "supply0", "supply1",
    };
    return nets.count(w) > 0;
}

bool is_var_type(std::string_view w) {
    static const std::unordered_set<std::string_view> vars = {
        "reg", "logic", "integer", "real", "realtime", "time", "genvar",
        "bit", "byte", "shortint", "int", "longint", "shortreal", "string",
        "event", "var",
    };
    return vars.count(w) > 0;
}

bool is_type_modifier(std::string_view w) {
    return w == "signed" || w == "unsigned" || w == "packed" || w == "automatic" ||
           w == "scalared" || w == "vectored" || w == "const" || w == "static";
}

bool is_gate_primitive(std::string_view w) {
    static const std::unordered_set<std::string_view> gates = {
        "and", "or", "nand", "nor", "xor", "xnor", "not", "buf",
        "bufif0", "bufif1", "notif0", "notif1", "pullup", "pulldown",
    };
    return gates.count(w) > 0;
}

/// Parse a Verilog integer literal ("8", "4'b1010", "'h_F") to its value.
std::optional<int64_t> literal_value(const std::string& text) {
    std::string digits;
    int base = 10;
    size_t quote = text.find('\'');
    if (quote == std::string::npos) {
        digits = text;
    } else {
        size_t p = quote + 1;
        if (p < text.size() && (text[p] == 's' || text[p] == 'S')) p++;
        if (p >= text.size()) return std::nullopt;
        switch (std::tolower(static_cast<unsigned char>(text[p]))) {
            case 'b': base = 2; p++; break;
            case 'o': base = 8; p++; break;
            case 'd': base = 10; p++; break;
            case 'h': base = 16; p++; break;
            case '0': case '1': base = 2; break; // unbased unsized
            default: return std::nullopt;        // 'x / 'z
        }
        digits = text.substr(p);
    }
    std::string clean;
    for (char c : digits) {
        if (c == '_') continue;
        if (c == 'x' || c == 'X' || c == 'z' || c == 'Z' || c == '?') return std::nullopt;
        clean += c;
    }
    if (clean.empty()) return std::nullopt;
    char* end = nullptr;
    long long v = std::strtoll(clean.c_str(), &end, base);
    if (end == nullptr || *end != '\0') return std::nullopt;
    return static_cast<int64_t>(v);
}

/// Read/write collector shared by the statement walkers.
struct Collector {
    std::set<std::string>* reads = nullptr;
    std::set<std::string>* writes = nullptr;
    std::vector<EdgeEvent>* edges = nullptr;
    int* case_count = nullptr;
};

class Parser {
public:
    Parser(const std::string& src, std::vector<Token> toks)
        : src_(src), toks_(std::move(toks)) {}

    RtlFile run() {
        while (!eof()) {
            if (cur().is_ident("module") || cur().is_ident("macromodule")) {
                parse_module();
            } else {
                pos_++;
            }
        }
        resolve_instances();
        return std::move(file_);
    }

private:
    const std::string& src_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
    RtlFile file_;
    ModuleDecl* current_module_ = nullptr;

    struct Conn {
        std::string formal;
        std::set<std::string> value_ids;
        std::set<std::string> index_ids;
    };
    struct PendingInstance {
        size_t block_index;
        std::string module_name;
        bool named = false;
        std::vector<Conn> conns;
    };
    std::vector<PendingInstance> pending_;

    // --- token plumbing -----------------------------------------------------

    bool eof() const { return pos_ >= toks_.size(); }

    [[noreturn]] void fail(const std::string& msg) const {
        if (pos_ < toks_.size()) {
            throw ParseFail{msg + " near '" + toks_[pos_].text + "'", toks_[pos_].line,
                            toks_[pos_].col};
        }
        int line = toks_.empty() ? 1 : toks_.back().line;
        throw ParseFail{msg + " at end of input", line, 1};
    }

    const Token& cur() const {
        if (eof()) const_cast<Parser*>(this)->fail("unexpected end of input");
        return toks_[pos_];
    }
    const Token* peek(size_t k = 1) const {
        return pos_ + k < toks_.size() ? &toks_[pos_ + k] : nullptr;
    }
    bool at(std::string_view text) const { return !eof() && toks_[pos_].text == text; }
    bool at_ident(std::string_view text) const {
        return !eof() && toks_[pos_].kind == TokKind::Identifier && toks_[pos_].text == text;
    }
    void expect(std::string_view text) {
        if (!at(text)) fail("expected '" + std::string(text) + "'");
        pos_++;
    }
    void skip_directives() {
        while (!eof() && toks_[pos_].kind == TokKind::Directive) pos_++;
    }

    /// Advance past one balanced (), [], {} group starting at the opener.
    void skip_group() {
        const std::string& open = cur().text;
        std::string close = open == "(" ? ")" : open == "[" ? "]" : "}";
        int depth = 0;
        while (!eof()) {
            if (cur().text == open) depth++;
            else if (cur().text == close && --depth == 0) { pos_++; return; }
            pos_++;
        }
        fail("unbalanced '" + open + "'");
    }

    void skip_to_semicolon() {
        while (!eof() && !at(";")) {
            if (at("(") || at("[") || at("{")) { skip_group(); continue; }
            pos_++;
        }
        if (!eof()) pos_++;
    }

    void skip_until_keyword(std::string_view kw) {
        while (!eof() && !at_ident(kw)) pos_++;
        if (eof()) fail("missing '" + std::string(kw) + "'");
        pos_++;
    }

    void skip_attribute() { // at '(' of '(*'
        pos_ += 2;
        while (!eof() && !(at("*") && peek() && peek()->is(")"))) pos_++;
        if (eof()) fail("unterminated attribute");
        pos_ += 2;
    }

    bool at_attribute() const {
        return at("(") && peek() && peek()->is("*") && peek(2) && !peek(2)->is(")");
    }

    // --- constant expressions ----------------------------------------------

    /// Evaluate a constant expression over [begin, end) token indices with the
    /// collected parameter environment. Supports + - * / % () and literals.
    std::optional<int64_t> eval_const(size_t begin, size_t end) const {
        size_t p = begin;
        auto result = eval_sum(p, end);
        if (result && p == end) return result;
        return std::nullopt;
    }

    std::optional<int64_t> eval_sum(size_t& p, size_t end) const {
        auto lhs = eval_product(p, end);
        if (!lhs) return std::nullopt;
        while (p < end && (toks_[p].is("+") || toks_[p].is("-"))) {
            bool add = toks_[p].is("+");
            p++;
            auto rhs = eval_product(p, end);
            if (!rhs) return std::nullopt;
            lhs = add ? *lhs + *rhs : *lhs - *rhs;
        }
        return lhs;
    }

    std::optional<int64_t> eval_product(size_t& p, size_t end) const {
        auto lhs = eval_atom(p, end);
        if (!lhs) return std::nullopt;
        while (p < end && (toks_[p].is("*") || toks_[p].is("/") || toks_[p].is("%"))) {
            char op = toks_[p].text[0];
            p++;
            auto rhs = eval_atom(p, end);
            if (!rhs || ((op == '/' || op == '%') && *rhs == 0)) return std::nullopt;
            lhs = op == '*' ? *lhs * *rhs : op == '/' ? *lhs / *rhs : *lhs % *rhs;
        }
        return lhs;
    }

    std::optional<int64_t> eval_atom(size_t& p, size_t end) const {
        if (p >= end) return std::nullopt;
        if (toks_[p].is("-")) {
            p++;
            auto v = eval_atom(p, end);
            return v ? std::optional<int64_t>(-*v) : std::nullopt;
        }
        if (toks_[p].is("+")) {
            p++;
            return eval_atom(p, end);
        }
        if (toks_[p].is("(")) {
            p++;
            auto v = eval_sum(p, end);
            if (!v || p >= end || !toks_[p].is(")")) return std::nullopt;
            p++;
            return v;
        }
        if (toks_[p].kind == TokKind::Number) {
            auto v = literal_value(toks_[p].text);
            if (v) p++;
            return v;
        }
        if (toks_[p].kind == TokKind::Identifier && !is_verilog_keyword(toks_[p].text)) {
            auto it = file_.parameters.find(toks_[p].text);
            if (it == file_.parameters.end()) return std::nullopt;
            p++;
            return it->second;
        }
        return std::nullopt;
    }

    // --- identifier harvesting ----------------------------------------------

    /// Collect read identifiers from [begin, end). Call-ee names (identifier
    /// directly before '(') and names after '.' are skipped.
    void collect_reads(size_t begin, size_t end, std::set<std::string>& into) const {
        for (size_t p = begin; p < end; p++) {
            const Token& t = toks_[p];
            if (t.kind != TokKind::Identifier || is_verilog_keyword(t.text)) continue;
            if (p > begin && toks_[p - 1].is(".")) continue;
            if (p + 1 < end && toks_[p + 1].is("(")) continue;
            into.insert(t.text);
        }
    }

    /// Collect from an L-value range: base identifiers are writes, identifiers
    /// inside select brackets are reads.
    void collect_lhs(size_t begin, size_t end, Collector& col) const {
        int bracket = 0;
        for (size_t p = begin; p < end; p++) {
            const Token& t = toks_[p];
            if (t.is("[")) { bracket++; continue; }
            if (t.is("]")) { if (bracket > 0) bracket--; continue; }
            if (t.kind != TokKind::Identifier || is_verilog_keyword(t.text)) continue;
            if (p > begin && toks_[p - 1].is(".")) continue;
            if (bracket > 0) {
                if (col.reads) col.reads->insert(t.text);
            } else {
                if (col.writes) col.writes->insert(t.text);
            }
        }
    }

    /// Index of the first token equal to `text` at bracket/paren/brace depth 0
    /// within [begin, end), or `end` when absent.
    size_t find_at_depth0(size_t begin, size_t end, std::string_view text) const {
        int depth = 0;
        for (size_t p = begin; p < end; p++) {
            const std::string& t = toks_[p].text;
            if (t == "(" || t == "[" || t == "{") depth++;
            else if (t == ")" || t == "]" || t == "}") depth--;
            else if (depth == 0 && t == text) return p;
        }
        return end;
    }

    /// End index (exclusive) of the statement starting at pos_: the first ';'
    /// at depth 0. pos_ is left on the token after the ';'.
    std::pair<size_t, size_t> consume_simple_statement() {
        size_t begin = pos_;
        int depth = 0;
        while (!eof()) {
            const std::string& t = toks_[pos_].text;
            if (t == "(" || t == "[" || t == "{") depth++;
            else if (t == ")" || t == "]" || t == "}") depth--;
            else if (t == ";" && depth == 0) {
                size_t end = pos_;
                pos_++;
                return {begin, end};
            }
            pos_++;
        }
        fail("statement missing ';'");
    }

    /// Parse the parenthesized expression at pos_ (cur is '('), collecting
    /// reads; returns the inner token range.
    std::pair<size_t, size_t> collect_paren_expr(Collector& col) {
        if (!at("(")) fail("expected '('");
        size_t begin = pos_ + 1;
        skip_group();
        size_t end = pos_ - 1;
        if (col.reads) collect_reads(begin, end, *col.reads);
        return {begin, end};
    }

    // --- event controls -----------------------------------------------------

    void parse_event_control(Collector& col) {
        expect("@");
        if (at("*")) { pos_++; return; }
        if (!at("(")) {
            // bare "@ clk"
            if (!eof() && cur().kind == TokKind::Identifier && !is_verilog_keyword(cur().text)) {
                if (col.reads) col.reads->insert(cur().text);
                pos_++;
            }
            return;
        }
        pos_++; // '('
        bool expecting_item = true;
        while (!eof() && !at(")")) {
            if (at("*")) { pos_++; continue; }
            if (at_ident("or") || at(",")) { pos_++; expecting_item = true; continue; }
            if (at_ident("posedge") || at_ident("negedge")) {
                bool pos_edge = cur().text == "posedge";
                pos_++;
                if (!eof() && cur().kind == TokKind::Identifier &&
                    !is_verilog_keyword(cur().text)) {
                    if (col.edges) col.edges->push_back({pos_edge, cur().text});
                    if (col.reads) col.reads->insert(cur().text);
                    pos_++;
                    while (at("[")) skip_group();
                }
                expecting_item = false;
                continue;
            }
            if (cur().kind == TokKind::Identifier && !is_verilog_keyword(cur().text) &&
                expecting_item) {
                if (col.reads) col.reads->insert(cur().text);
                pos_++;
                while (at("[") || at(".")) {
                    if (at(".")) pos_ += 2;
                    else skip_group();
                }
                expecting_item = false;
                continue;
            }
            pos_++;
        }
        expect(")");
    }

    // --- statements -----------------------------------------------------------

    void parse_statement(Collector& col) {
        skip_directives();
        if (eof()) fail("unexpected end of input in statement");
        const Token& t = cur();

        if (t.is(";")) { pos_++; return; }
        if (at_attribute()) { skip_attribute(); parse_statement(col); return; }

        if (t.is_ident("begin")) {
            pos_++;
            if (at(":")) pos_ += 2; // block label
            while (!eof() && !at_ident("end")) parse_statement(col);
            expect("end");
            if (at(":")) pos_ += 2;
            return;
        }
        if (t.is_ident("fork")) {
            pos_++;
            if (at(":")) pos_ += 2;
            while (!eof() && !at_ident("join") && !at_ident("join_any") && !at_ident("join_none"))
                parse_statement(col);
            if (eof()) fail("missing join");
            pos_++;
            return;
        }
        if (t.is_ident("unique") || t.is_ident("unique0") || t.is_ident("priority")) {
            pos_++;
            parse_statement(col);
            return;
        }
        if (t.is_ident("if")) {
            pos_++;
            collect_paren_expr(col);
            parse_statement(col);
            if (at_ident("else")) {
                pos_++;
                parse_statement(col);
            }
            return;
        }
        if (t.is_ident("case") || t.is_ident("casez") || t.is_ident("casex")) {
            parse_case(col);
            return;
        }
        if (t.is_ident("for")) {
            pos_++;
            expect("(");
            parse_for_header(col);
            parse_statement(col);
            return;
        }
        if (t.is_ident("while") || t.is_ident("repeat")) {
            pos_++;
            collect_paren_expr(col);
            parse_statement(col);
            return;
        }
        if (t.is_ident("forever")) {
            pos_++;
            parse_statement(col);
            return;
        }
        if (t.is_ident("do")) {
            pos_++;
            parse_statement(col);
            if (at_ident("while")) {
                pos_++;
                collect_paren_expr(col);
            }
            if (at(";")) pos_++;
            return;
        }
        if (t.is_ident("wait")) {
            pos_++;
            if (at("(")) collect_paren_expr(col);
            parse_statement(col);
            return;
        }
        if (t.is_ident("disable")) {
            skip_to_semicolon();
            return;
        }
        if (t.is("@")) {
            parse_event_control(col);
            parse_statement(col);
            return;
        }
        if (t.is("#")) {
            skip_delay();
            if (at(";")) { pos_++; return; }
            parse_statement(col);
            return;
        }
        if (t.is("->") || t.is("->>")) {
            skip_to_semicolon();
            return;
        }
        if (t.is_ident("return")) {
            auto [b, e] = consume_simple_statement();
            if (col.reads) collect_reads(b + 1, e, *col.reads);
            return;
        }
        if (t.is_ident("assert") || t.is_ident("assume") || t.is_ident("cover")) {
            pos_++;
            if (at_ident("property")) pos_++;
            if (at("(")) collect_paren_expr(col);
            if (at(";")) { pos_++; return; }
            if (at_ident("else")) {
                pos_++;
                parse_statement(col);
                return;
            }
            parse_statement(col);
            if (at_ident("else")) {
                pos_++;
                parse_statement(col);
            }
            return;
        }
        if (t.kind == TokKind::SystemId) {
            auto [b, e] = consume_simple_statement();
            if (col.reads) collect_reads(b + 1, e, *col.reads);
            return;
        }
        if (t.kind == TokKind::Identifier &&
            (is_var_type(t.text) || is_type_modifier(t.text) || t.is_ident("parameter") ||
             t.is_ident("localparam") || t.is_ident("typedef"))) {
            skip_to_semicolon(); // local declaration
            return;
        }
        if (t.is_ident("force") || t.is_ident("release") || t.is_ident("deassign") ||
            t.is_ident("assign")) {
            pos_++; // procedural continuous assign; fall through to assignment
        }

        parse_assignment_or_call(col);
    }

    void skip_delay() { // at '#'
        pos_++;
        if (at("(")) { skip_group(); return; }
        if (!eof() &&
            (cur().kind == TokKind::Number || cur().kind == TokKind::Identifier)) {
            pos_++;
        }
    }

    void parse_case(Collector& col) {
        pos_++; // case / casez / casex
        if (col.case_count) (*col.case_count)++;
        collect_paren_expr(col);
        if (at_ident("inside")) pos_++;
        while (!eof() && !at_ident("endcase")) {
            skip_directives();
            if (at_ident("default")) {
                pos_++;
                if (at(":")) pos_++;
                parse_statement(col);
                continue;
            }
            // labels up to ':' at depth 0 — reads
            int depth = 0;
            size_t begin = pos_;
            while (!eof()) {
                const std::string& tx = toks_[pos_].text;
                if (tx == "(" || tx == "[" || tx == "{") depth++;
                else if (tx == ")" || tx == "]" || tx == "}") depth--;
                else if (tx == ":" && depth == 0) break;
                else if (tx == "endcase" && depth == 0) fail("case item missing ':'");
                pos_++;
            }
            if (col.reads) collect_reads(begin, pos_, *col.reads);
            expect(":");
            parse_statement(col);
        }
        expect("endcase");
    }

    void parse_for_header(Collector& col) { // after '('
        // init ; cond ; step )
        size_t begin = pos_;
        int depth = 1;
        std::vector<size_t> semis;
        size_t end = begin;
        while (!eof()) {
            const std::string& tx = toks_[pos_].text;
            if (tx == "(" || tx == "[" || tx == "{") depth++;
            else if (tx == ")" || tx == "]" || tx == "}") {
                depth--;
                if (depth == 0) { end = pos_; pos_++; break; }
            } else if (tx == ";" && depth == 1) {
                semis.push_back(pos_);
            }
            pos_++;
        }
        if (semis.size() == 2) {
            analyze_assignment_range(begin, semis[0], col);
            if (col.reads) collect_reads(semis[0] + 1, semis[1], *col.reads);
            analyze_assignment_range(semis[1] + 1, end, col);
        } else if (col.reads) {
            collect_reads(begin, end, *col.reads);
        }
    }

    void parse_assignment_or_call(Collector& col) {
        auto [begin, end] = consume_simple_statement();
        analyze_assignment_range(begin, end, col);
    }

    /// Classify a token range as assignment / op-assignment / incdec / call
    /// and collect R/W accordingly.
    void analyze_assignment_range(size_t begin, size_t end, Collector& col) const {
        if (begin >= end) return;
        // strip leading local type keywords in for-init ("int i = 0")
        while (begin < end && toks_[begin].kind == TokKind::Identifier &&
               (is_var_type(toks_[begin].text) || is_type_modifier(toks_[begin].text)))
            begin++;

        static const char* ops[] = {"<=", "=",  "+=", "-=", "*=", "/=",
                                    "%=", "&=", "|=", "^=", "<<=", ">>=", "<<<=", ">>>="};
        size_t op_pos = end;
        std::string op;
        for (const char* candidate : ops) {
            size_t p = find_at_depth0(begin, end, candidate);
            if (p < op_pos) {
                op_pos = p;
                op = candidate;
            }
        }
        if (op_pos == end) {
            size_t inc = find_at_depth0(begin, end, "++");
            if (inc == end) inc = find_at_depth0(begin, end, "--");
            if (inc != end) {
                // i++ / ++i: stepped variable is both read and written
                collect_lhs(begin, end, col);
                if (col.reads) collect_reads(begin, end, *col.reads);
                return;
            }
            if (col.reads) collect_reads(begin, end, *col.reads); // task call
            return;
        }
        collect_lhs(begin, op_pos, col);
        size_t rhs = op_pos + 1;
        // intra-assignment delay: "a = #5 b;"
        if (rhs < end && toks_[rhs].is("#")) {
            rhs++;
            if (rhs < end && (toks_[rhs].kind == TokKind::Number ||
                              toks_[rhs].kind == TokKind::Identifier))
                rhs++;
        }
        if (col.reads) collect_reads(rhs, end, *col.reads);
        if (op != "<=" && op != "=" && col.reads) {
            // op-assign also reads the target
            std::set<std::string> target;
            Collector lhs_only;
            lhs_only.writes = &target;
            collect_lhs(begin, op_pos, lhs_only);
            for (const auto& w : target) col.reads->insert(w);
        }
    }

    // --- module items ---------------------------------------------------------

    RtlBlock& start_block(BlockKind kind, size_t start_tok) {
        RtlBlock b;
        b.id = static_cast<int>(file_.blocks.size());
        b.kind = kind;
        b.start_line = toks_[start_tok].line;
        b.start_offset = toks_[start_tok].offset;
        file_.blocks.push_back(std::move(b));
        return file_.blocks.back();
    }

    void finish_block(RtlBlock& b, size_t end_tok_exclusive) {
        const Token& last = toks_[end_tok_exclusive - 1];
        b.end_line = last.line;
        b.end_offset = last.offset + last.text.size();
        b.text = src_.substr(b.start_offset, b.end_offset - b.start_offset);
    }

    void parse_module() {
        size_t header_tok = pos_;
        pos_++; // module
        if (eof() || cur().kind != TokKind::Identifier) fail("module missing name");
        ModuleDecl decl;
        decl.name = cur().text;
        decl.start_line = toks_[header_tok].line;
        pos_++;

        if (at("#")) {
            pos_++;
            if (at("(")) parse_parameter_list();
        }
        if (at("(")) parse_ansi_ports(decl);
        expect(";");

        file_.modules.push_back(decl);
        current_module_ = &file_.modules.back();

        while (!eof() && !at_ident("endmodule")) parse_module_item();
        if (eof()) fail("missing endmodule");
        current_module_->end_line = cur().line;
        pos_++; // endmodule
        current_module_ = nullptr;
    }

    void parse_parameter_list() { // at '('
        size_t begin = pos_ + 1;
        skip_group();
        size_t end = pos_ - 1;
        // every "name = expr" at depth 1 records a parameter default
        int depth = 0;
        for (size_t p = begin; p < end; p++) {
            const std::string& tx = toks_[p].text;
            if (tx == "(" || tx == "[" || tx == "{") { depth++; continue; }
            if (tx == ")" || tx == "]" || tx == "}") { depth--; continue; }
            if (depth == 0 && tx == "=" && p > begin &&
                toks_[p - 1].kind == TokKind::Identifier) {
                size_t vend = p + 1;
                int d2 = 0;
                while (vend < end) {
                    const std::string& vx = toks_[vend].text;
                    if (vx == "(" || vx == "[" || vx == "{") d2++;
                    else if (vx == ")" || vx == "]" || vx == "}") d2--;
                    else if (vx == "," && d2 == 0) break;
                    vend++;
                }
                auto v = eval_const(p + 1, vend);
                if (v) file_.parameters[toks_[p - 1].text] = *v;
            }
        }
    }

    /// Range "[msb:lsb]" at pos_: record width, advance past it.
    void parse_range_decl() { // at '['
        size_t begin = pos_ + 1;
        skip_group();
        size_t end = pos_ - 1;
        size_t colon = find_at_depth0(begin, end, ":");
        if (colon == end) return; // not a range
        auto msb = eval_const(begin, colon);
        auto lsb = eval_const(colon + 1, end);
        int64_t width;
        if (msb && lsb) {
            width = (*msb > *lsb ? *msb - *lsb : *lsb - *msb) + 1;
        } else {
            width = 32;
            file_.width_warning = true;
        }
        file_.max_declared_width = std::max(file_.max_declared_width, width);
    }

    void parse_ansi_ports(ModuleDecl& decl) { // at '('
        pos_++;
        std::optional<PortDir> dir;
        while (!eof() && !at(")")) {
            if (at_attribute()) { skip_attribute(); continue; }
            if (at_ident("input")) { dir = PortDir::Input; pos_++; continue; }
            if (at_ident("output")) { dir = PortDir::Output; pos_++; continue; }
            if (at_ident("inout")) { dir = PortDir::Inout; pos_++; continue; }
            if (at("[")) { parse_range_decl(); continue; }
            if (at(",")) { pos_++; continue; }
            if (cur().kind == TokKind::Identifier &&
                (is_net_type(cur().text) || is_var_type(cur().text) ||
                 is_type_modifier(cur().text) || cur().is_ident("parameter"))) {
                if (cur().is_ident("parameter")) { // parameter in port header
                    pos_++;
                    continue;
                }
                pos_++;
                continue;
            }
            if (cur().kind == TokKind::Identifier && !is_verilog_keyword(cur().text)) {
                // a port name, unless followed by another identifier (user type)
                if (peek() && peek()->kind == TokKind::Identifier &&
                    !is_verilog_keyword(peek()->text)) {
                    pos_++; // treat as type name
                    continue;
                }
                decl.ports.push_back({cur().text, dir.value_or(PortDir::Input)});
                pos_++;
                // ".name(sig)" header form, default value, or unpacked range
                if (at("(")) { skip_group(); continue; }
                while (at("[")) skip_group();
                if (at("=")) {
                    while (!eof() && !at(",") && !at(")")) {
                        if (at("(") || at("[") || at("{")) skip_group();
                        else pos_++;
                    }
                }
                continue;
            }
            pos_++;
        }
        expect(")");
    }

    void parse_module_item() {
        skip_directives();
        if (eof()) return;
        const Token& t = cur();

        if (at_attribute()) { skip_attribute(); return; }
        if (t.is(";")) { pos_++; return; }

        if (t.kind == TokKind::Identifier) {
            const std::string& w = t.text;
            if (w == "end" || w == "endcase" || w == "endgenerate" || w == "join" ||
                w == "else" || w == "endfunction" || w == "endtask") {
                fail("orphan '" + w + "' at module level");
            }
            if (w == "input" || w == "output" || w == "inout") {
                parse_port_declaration();
                return;
            }
            if (w == "parameter" || w == "localparam") {
                parse_parameter_declaration();
                return;
            }
            if (is_net_type(w)) {
                parse_net_declaration();
                return;
            }
            if (is_var_type(w) || is_type_modifier(w) || w == "typedef" || w == "defparam" ||
                w == "import") {
                while (!eof() && !at(";")) {
                    if (at("[")) { parse_range_decl(); continue; }
                    if (at("(") || at("{")) { skip_group(); continue; }
                    pos_++;
                }
                if (!eof()) pos_++;
                return;
            }
            if (w == "always" || w == "always_ff" || w == "always_comb" ||
                w == "always_latch" || w == "initial" || w == "final") {
                parse_procedural();
                return;
            }
            if (w == "assign") {
                parse_continuous_assign();
                return;
            }
            if (w == "function") { skip_until_keyword("endfunction"); return; }
            if (w == "task") { skip_until_keyword("endtask"); return; }
            if (w == "generate") { parse_generate(); return; }
            if (w == "specify") { skip_until_keyword("endspecify"); return; }
            if (w == "property") { skip_until_keyword("endproperty"); return; }
            if (w == "sequence") { skip_until_keyword("endsequence"); return; }
            if (w == "assert" || w == "assume" || w == "cover" || w == "bind") {
                skip_to_semicolon();
                return;
            }
            if (is_gate_primitive(w)) {
                parse_gate_instance();
                return;
            }
            if (!is_verilog_keyword(w)) {
                parse_instance_or_typed_decl();
                return;
            }
        }
        // Unknown construct: skip one statement defensively.
        skip_to_semicolon();
    }

    void parse_port_declaration() {
        std::string dword = cur().text;
        PortDir dir = dword == "input"    ? PortDir::Input
                      : dword == "output" ? PortDir::Output
                                          : PortDir::Inout;
        pos_++;
        // type/range prefix then declared names
        while (!eof() && !at(";")) {
            if (at("[")) { parse_range_decl(); continue; }
            if (cur().kind == TokKind::Identifier && !is_verilog_keyword(cur().text)) {
                // port name unless followed by another plain identifier
                if (peek() && peek()->kind == TokKind::Identifier &&
                    !is_verilog_keyword(peek()->text)) {
                    pos_++;
                    continue;
                }
                upsert_port(cur().text, dir);
                pos_++;
                while (at("[")) skip_group(); // unpacked dims
                if (at("=")) {                // default init: skip value
                    while (!eof() && !at(",") && !at(";")) {
                        if (at("(") || at("[") || at("{")) skip_group();
                        else pos_++;
                    }
                }
                continue;
            }
            pos_++;
        }
        if (!eof()) pos_++;
    }

    void upsert_port(const std::string& name, PortDir dir) {
        if (!current_module_) return;
        for (auto& p : current_module_->ports) {
            if (p.name == name) {
                p.dir = dir;
                return;
            }
        }
        current_module_->ports.push_back({name, dir});
    }

    void parse_parameter_declaration() {
        size_t begin = pos_;
        while (!eof() && !at(";")) {
            if (at("(") || at("[") || at("{")) { skip_group(); continue; }
            pos_++;
        }
        size_t end = pos_;
        if (!eof()) pos_++;
        // harvest name = const pairs
        for (size_t p = begin; p < end; p++) {
            if (toks_[p].is("=") && p > begin && toks_[p - 1].kind == TokKind::Identifier) {
                size_t vend = p + 1;
                int depth = 0;
                while (vend < end) {
                    const std::string& vx = toks_[vend].text;
                    if (vx == "(" || vx == "[" || vx == "{") depth++;
                    else if (vx == ")" || vx == "]" || vx == "}") depth--;
                    else if (vx == "," && depth == 0) break;
                    vend++;
                }
                auto v = eval_const(p + 1, vend);
                if (v) file_.parameters[toks_[p - 1].text] = *v;
            }
        }
    }

    /// Net declaration; with an initializer it is also a continuous assignment
    /// and becomes a block.
    void parse_net_declaration() {
        size_t start_tok = pos_;
        size_t scan = pos_;
        bool has_init = false;
        {
            int depth = 0;
            while (scan < toks_.size()) {
                const std::string& tx = toks_[scan].text;
                if (tx == "(" || tx == "[" || tx == "{") depth++;
                else if (tx == ")" || tx == "]" || tx == "}") depth--;
                else if (tx == ";" && depth == 0) break;
                else if (tx == "=" && depth == 0) has_init = true;
                scan++;
            }
        }
        if (!has_init) {
            while (!eof() && !at(";")) {
                if (at("[")) { parse_range_decl(); continue; }
                if (at("(") || at("{")) { skip_group(); continue; }
                pos_++;
            }
            if (!eof()) pos_++;
            return;
        }

        RtlBlock& blk = start_block(BlockKind::ContinuousAssign, start_tok);
        pos_++; // net type keyword
        while (at("[")) parse_range_decl();
        // name [= expr] {, name [= expr]} ;
        bool in_value = false;
        size_t value_begin = 0;
        auto flush_value = [&](size_t value_end) {
            if (in_value) collect_reads(value_begin, value_end, blk.reads);
            in_value = false;
        };
        while (!eof() && !at(";")) {
            if (at("(") || at("[") || at("{")) {
                skip_group();
                continue;
            }
            if (at("=")) {
                pos_++;
                in_value = true;
                value_begin = pos_;
                continue;
            }
            if (at(",")) {
                flush_value(pos_);
                pos_++;
                continue;
            }
            if (!in_value && cur().kind == TokKind::Identifier &&
                !is_verilog_keyword(cur().text)) {
                blk.writes.insert(cur().text);
            }
            pos_++;
        }
        flush_value(pos_);
        expect(";");
        finish_block(blk, pos_);
    }

    void parse_continuous_assign() {
        size_t start_tok = pos_;
        RtlBlock& blk = start_block(BlockKind::ContinuousAssign, start_tok);
        pos_++; // assign
        if (at("#")) skip_delay();
        if (at("(") && peek() && (peek()->is_ident("strong0") || peek()->is_ident("strong1") ||
                                  peek()->is_ident("weak0") || peek()->is_ident("weak1") ||
                                  peek()->is_ident("pull0") || peek()->is_ident("pull1"))) {
            skip_group(); // drive strength
        }
        Collector col;
        col.reads = &blk.reads;
        col.writes = &blk.writes;
        // assignment list: lhs = rhs {, lhs = rhs} ;
        size_t begin = pos_;
        int depth = 0;
        std::vector<std::pair<size_t, size_t>> parts;
        size_t part_begin = begin;
        while (!eof()) {
            const std::string& tx = toks_[pos_].text;
            if (tx == "(" || tx == "[" || tx == "{") depth++;
            else if (tx == ")" || tx == "]" || tx == "}") depth--;
            else if (depth == 0 && tx == ",") {
                parts.push_back({part_begin, pos_});
                part_begin = pos_ + 1;
            } else if (depth == 0 && tx == ";") {
                parts.push_back({part_begin, pos_});
                break;
            }
            pos_++;
        }
        if (eof()) fail("assign missing ';'");
        pos_++; // ';'
        for (auto [b, e] : parts) {
            size_t eq = find_at_depth0(b, e, "=");
            if (eq == e) {
                collect_reads(b, e, blk.reads);
                continue;
            }
            collect_lhs(b, eq, col);
            collect_reads(eq + 1, e, blk.reads);
        }
        finish_block(blk, pos_);
    }

    void parse_procedural() {
        size_t start_tok = pos_;
        const std::string word = cur().text;
        BlockKind kind = word == "always_ff"      ? BlockKind::AlwaysFf
                         : word == "always_comb"  ? BlockKind::AlwaysComb
                         : word == "always_latch" ? BlockKind::AlwaysLatch
                                                  : BlockKind::AlwaysGeneric;
        RtlBlock& blk = start_block(kind, start_tok);
        pos_++;
        Collector col;
        col.reads = &blk.reads;
        col.writes = &blk.writes;
        col.edges = &blk.edge_events;
        col.case_count = &blk.case_count;
        if (at("@")) parse_event_control(col);
        else if (at("#")) skip_delay();
        parse_statement(col);
        finish_block(blk, pos_);
    }

    /// generate..endgenerate is opaque: one block, conservative R/W over the
    /// whole body (assignment targets written, all other identifiers read).
    void parse_generate() {
        size_t start_tok = pos_;
        RtlBlock& blk = start_block(BlockKind::ModuleInstance, start_tok);
        pos_++;
        size_t body_begin = pos_;
        while (!eof() && !at_ident("endgenerate")) pos_++;
        if (eof()) fail("missing endgenerate");
        size_t body_end = pos_;
        pos_++; // endgenerate
        for (size_t p = body_begin; p < body_end; p++) {
            const Token& tok = toks_[p];
            if (tok.is("=") || tok.is("<=")) {
                // walk back over selects to the assigned base identifier
                size_t q = p;
                while (q > body_begin && toks_[q - 1].is("]")) {
                    int depth = 0;
                    while (q > body_begin) {
                        q--;
                        if (toks_[q].is("]")) depth++;
                        else if (toks_[q].is("[") && --depth == 0) break;
                    }
                }
                if (q > body_begin && toks_[q - 1].kind == TokKind::Identifier &&
                    !is_verilog_keyword(toks_[q - 1].text)) {
                    blk.writes.insert(toks_[q - 1].text);
                }
                continue;
            }
            if (tok.kind != TokKind::Identifier || is_verilog_keyword(tok.text)) continue;
            if (p > body_begin && toks_[p - 1].is(".")) continue;
            if (p + 1 < body_end && toks_[p + 1].is("(")) continue;
            blk.reads.insert(tok.text);
        }
        finish_block(blk, pos_);
    }

    void parse_gate_instance() {
        size_t start_tok = pos_;
        RtlBlock& blk = start_block(BlockKind::ModuleInstance, start_tok);
        pos_++; // gate keyword
        if (at("#")) { skip_delay(); }
        while (!eof() && !at(";")) {
            if (at("(")) {
                size_t begin = pos_ + 1;
                skip_group();
                size_t end = pos_ - 1;
                // first connection written, the rest read
                size_t comma = find_at_depth0(begin, end, ",");
                Collector col;
                col.reads = &blk.reads;
                col.writes = &blk.writes;
                collect_lhs(begin, comma == end ? end : comma, col);
                if (comma != end) collect_reads(comma + 1, end, blk.reads);
                continue;
            }
            pos_++;
        }
        expect(";");
        finish_block(blk, pos_);
    }

    /// Distinguish "type_name var;" from "mod_name inst (...)". Shapes:
    ///   ident ident ;|,|=|[     → declaration
    ///   ident [#(...)] ident (  → instance
    ///   ident (                 → instance with omitted name (rare)
    void parse_instance_or_typed_decl() {
        size_t start_tok = pos_;
        std::string module_name = cur().text;
        size_t look = pos_ + 1;
        if (look < toks_.size() && toks_[look].is("#")) {
            look++;
            if (look < toks_.size() && toks_[look].is("(")) {
                int depth = 0;
                while (look < toks_.size()) {
                    if (toks_[look].is("(")) depth++;
                    else if (toks_[look].is(")") && --depth == 0) { look++; break; }
                    look++;
                }
            }
        }
        bool looks_instance = false;
        if (look < toks_.size() && toks_[look].kind == TokKind::Identifier &&
            !is_verilog_keyword(toks_[look].text)) {
            size_t after = look + 1;
            while (after < toks_.size() && toks_[after].is("[")) {
                int depth = 0;
                while (after < toks_.size()) {
                    if (toks_[after].is("[")) depth++;
                    else if (toks_[after].is("]") && --depth == 0) { after++; break; }
                    after++;
                }
            }
            looks_instance = after < toks_.size() && toks_[after].is("(");
        } else if (look < toks_.size() && toks_[look].is("(")) {
            looks_instance = true;
        }
        if (!looks_instance) {
            skip_to_semicolon(); // user-typed declaration
            return;
        }

        RtlBlock& blk = start_block(BlockKind::ModuleInstance, start_tok);
        PendingInstance pending;
        pending.block_index = file_.blocks.size() - 1;
        pending.module_name = module_name;
        pos_++;

        if (at("#")) {
            pos_++;
            if (at("(")) {
                size_t begin = pos_ + 1;
                skip_group();
                collect_reads(begin, pos_ - 1, blk.reads); // parameter overrides
            }
        }

        while (!eof() && !at(";")) {
            if (cur().kind == TokKind::Identifier && !is_verilog_keyword(cur().text)) {
                pos_++; // instance name
                while (at("[")) skip_group();
            }
            if (at("(")) {
                parse_connection_list(pending);
            }
            if (at(",")) { pos_++; continue; }
            if (!at(";")) pos_++;
        }
        expect(";");
        finish_block(blk, pos_);
        pending_.push_back(std::move(pending));
    }

    void parse_connection_list(PendingInstance& pending) { // at '('
        pos_++;
        while (!eof() && !at(")")) {
            if (at(",")) { pos_++; continue; }
            if (at(".")) {
                pos_++;
                if (at("*")) { pos_++; continue; }
                if (eof() || cur().kind != TokKind::Identifier) fail("bad named connection");
                Conn conn;
                conn.formal = cur().text;
                pos_++;
                pending.named = true;
                if (at("(")) {
                    size_t begin = pos_ + 1;
                    skip_group();
                    size_t end = pos_ - 1;
                    harvest_conn_ids(begin, end, conn);
                } else {
                    conn.value_ids.insert(conn.formal); // .name shorthand
                }
                pending.conns.push_back(std::move(conn));
                continue;
            }
            // positional expression up to ',' or ')' at depth 0
            size_t begin = pos_;
            int depth = 0;
            while (!eof()) {
                const std::string& tx = toks_[pos_].text;
                if (tx == "(" || tx == "[" || tx == "{") depth++;
                else if (tx == ")" || tx == "]" || tx == "}") {
                    if (depth == 0) break;
                    depth--;
                } else if (tx == "," && depth == 0) {
                    break;
                }
                pos_++;
            }
            Conn conn;
            harvest_conn_ids(begin, pos_, conn);
            pending.conns.push_back(std::move(conn));
        }
        expect(")");
    }

    void harvest_conn_ids(size_t begin, size_t end, Conn& conn) const {
        int bracket = 0;
        for (size_t p = begin; p < end; p++) {
            const Token& t = toks_[p];
            if (t.is("[")) { bracket++; continue; }
            if (t.is("]")) { if (bracket > 0) bracket--; continue; }
            if (t.kind != TokKind::Identifier || is_verilog_keyword(t.text)) continue;
            if (p > begin && toks_[p - 1].is(".")) continue;
            if (p + 1 < end && toks_[p + 1].is("(")) continue;
            (bracket > 0 ? conn.index_ids : conn.value_ids).insert(t.text);
        }
    }

    // --- instance resolution ----------------------------------------------

    static bool formal_suggests_output(const std::string& name) {
        std::string lower;
        for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (lower == "y" || lower == "q" || lower == "o") return true;
        return lower.find("out") != std::string::npos;
    }

    void resolve_instances() {
        for (auto& pending : pending_) {
            RtlBlock& blk = file_.blocks[pending.block_index];
            const ModuleDecl* decl = nullptr;
            for (const auto& m : file_.modules) {
                if (m.name == pending.module_name) { decl = &m; break; }
            }
            for (size_t k = 0; k < pending.conns.size(); k++) {
                const Conn& conn = pending.conns[k];
                for (const auto& id : conn.index_ids) blk.reads.insert(id);
                std::optional<PortDir> dir;
                if (decl) {
                    if (pending.named) {
                        for (const auto& p : decl->ports) {
                            if (p.name == conn.formal) { dir = p.dir; break; }
                        }
                    } else if (k < decl->ports.size()) {
                        dir = decl->ports[k].dir;
                    }
                }
                if (dir) {
                    if (*dir == PortDir::Input) {
                        for (const auto& id : conn.value_ids) blk.reads.insert(id);
                    } else if (*dir == PortDir::Output) {
                        for (const auto& id : conn.value_ids) blk.writes.insert(id);
                    } else {
                        for (const auto& id : conn.value_ids) {
                            blk.reads.insert(id);
                            blk.writes.insert(id);
                        }
                    }
                    continue;
                }
                // unknown direction: read everything; write plausible outputs
                for (const auto& id : conn.value_ids) blk.reads.insert(id);
                const bool write_all = !pending.named;
                if (write_all || formal_suggests_output(conn.formal)) {
                    for (const auto& id : conn.value_ids) blk.writes.insert(id);
                }
            }
        }
    }
};

} // namespace

Result<RtlFile> analyze_rtl(const std::string& source) {
    auto toks = tokenize_verilog(source);
    if (!toks.ok()) return toks.error();
    try {
        Parser parser(source, toks.take());
        return parser.run();
    } catch (const ParseFail& pf) {
        return make_error("SyntaxError", pf.message,
                          std::to_string(pf.line) + ":" + std::to_string(pf.col));
    }
}

Result<std::vector<RtlBlock>> decompose(const std::string& source) {
    auto file = analyze_rtl(source);
    if (!file.ok()) return file.error();
    return std::move(file.value().blocks);
}

DependencyGraph build_graph(std::vector<RtlBlock> blocks) {
    DependencyGraph g;
    g.blocks = std::move(blocks);
    for (const auto& b : g.blocks) {
        for (const auto& w : b.writes) g.driver_map[w].insert(b.id);
    }
    for (const auto& reader : g.blocks) {
        for (const auto& r : reader.reads) {
            auto it = g.driver_map.find(r);
            if (it == g.driver_map.end()) continue;
            for (int from : it->second) g.edges.insert({from, reader.id});
        }
    }
    return g;
}

SuspectSet backward_slice(const DependencyGraph& g, const std::vector<std::string>& fail,
                          int d_max, const std::set<std::string>& exclude_reads) {
    SuspectSet out;
    out.seed_signals = fail;
    out.depth_used = d_max;

    std::set<int> level;
    for (const auto& y : fail) {
        auto it = g.driver_map.find(y);
        if (it == g.driver_map.end()) continue;
        level.insert(it->second.begin(), it->second.end());
    }
    if (level.empty()) {
        out.warnings.push_back(make_error(
            "EmptySlice", "no block drives any failing signal; check signal names", ""));
        return out;
    }

    std::set<int> visited;
    for (int depth = 0; depth <= d_max; depth++) {
        std::set<int> next;
        for (int id : level) {
            if (!visited.insert(id).second) continue;
            out.block_ids.push_back(id);
        }
        if (depth == d_max) break;
        for (int id : level) {
            const RtlBlock* b = g.block_by_id(id);
            if (!b) continue;
            for (const auto& r : b->reads) {
                if (exclude_reads.count(r)) continue;
                auto it = g.driver_map.find(r);
                if (it == g.driver_map.end()) continue;
                for (int from : it->second) {
                    if (!visited.count(from)) next.insert(from);
                }
            }
        }
        if (next.empty()) break;
        level = std::move(next);
    }

    for (int id : out.block_ids) {
        const RtlBlock* b = g.block_by_id(id);
        out.line_ranges.push_back({b->start_line, b->end_line});
    }
    return out;
}

} // namespace verisure
