// SPDX-License-Identifier: Apache-2.0
#include "support/expr_eval.hpp"

#include <cctype>
#include <vector>

#include "verisure/verilog.hpp"

namespace testsupport {

using verisure::Error;
using verisure::Result;
using verisure::TokKind;
using verisure::Token;

namespace {

struct Eval {
    const std::vector<Token>& toks;
    const std::map<std::string, uint64_t>& env;
    size_t pos = 0;
    std::optional<Error> err;

    const Token* peek() const { return pos < toks.size() ? &toks[pos] : nullptr; }

    bool at(std::string_view t) const {
        const Token* tok = peek();
        return tok && tok->text == t;
    }

    bool eat(std::string_view t) {
        if (!at(t)) return false;
        ++pos;
        return true;
    }

    uint64_t fail(std::string code, std::string msg) {
        if (!err) err = verisure::make_error(std::move(code), std::move(msg));
        return 0;
    }

    uint64_t number(const std::string& text) {
        std::string t;
        for (char c : text)
            if (c != '_') t += c;
        size_t tick = t.find('\'');
        int base = 10;
        std::string digits = t;
        if (tick != std::string::npos) {
            digits = t.substr(tick + 1);
            if (digits.empty()) return fail("EvalError", "empty based literal: " + text);
            if (digits[0] == 's' || digits[0] == 'S') digits.erase(0, 1);
            char b = digits.empty() ? 'd' : static_cast<char>(std::tolower(digits[0]));
            switch (b) {
            case 'b': base = 2; digits.erase(0, 1); break;
            case 'o': base = 8; digits.erase(0, 1); break;
            case 'd': base = 10; digits.erase(0, 1); break;
            case 'h': base = 16; digits.erase(0, 1); break;
            default: base = 10; break; // '0 / '1 unsized forms keep the digit
            }
        }
        if (digits.empty()) return fail("EvalError", "empty literal: " + text);
        uint64_t v = 0;
        for (char c : digits) {
            int d;
            if (c >= '0' && c <= '9')
                d = c - '0';
            else if (c >= 'a' && c <= 'f')
                d = 10 + (c - 'a');
            else if (c >= 'A' && c <= 'F')
                d = 10 + (c - 'A');
            else
                return fail("EvalError", "digit out of range in literal: " + text);
            if (d >= base) return fail("EvalError", "digit out of range in literal: " + text);
            v = v * static_cast<uint64_t>(base) + static_cast<uint64_t>(d);
        }
        return v;
    }

    uint64_t primary() {
        const Token* tok = peek();
        if (!tok) return fail("EvalError", "expression ended early");
        if (tok->kind == TokKind::Number) {
            ++pos;
            return number(tok->text);
        }
        if (tok->kind == TokKind::Identifier) {
            auto it = env.find(tok->text);
            if (it == env.end()) return fail("EvalError", "unknown identifier: " + tok->text);
            ++pos;
            return it->second;
        }
        if (eat("(")) {
            uint64_t v = ternary();
            if (!eat(")")) return fail("EvalError", "missing )");
            return v;
        }
        return fail("EvalError", "unexpected token: " + tok->text);
    }

    uint64_t unary() {
        if (eat("!")) return unary() == 0 ? 1 : 0;
        if (eat("~")) return ~unary();
        if (eat("-")) return static_cast<uint64_t>(-static_cast<int64_t>(unary()));
        if (eat("+")) return unary();
        if (eat("&")) {
            uint64_t v = unary();
            return v == ~uint64_t{0} ? 1 : 0; // reduction over 64-bit domain
        }
        if (eat("|")) return unary() != 0 ? 1 : 0;
        if (eat("^")) {
            uint64_t v = unary();
            int ones = 0;
            for (; v; v >>= 1) ones += static_cast<int>(v & 1);
            return static_cast<uint64_t>(ones & 1);
        }
        return primary();
    }

    uint64_t muldiv() {
        uint64_t v = unary();
        for (;;) {
            if (eat("*")) {
                v = v * unary();
            } else if (eat("/")) {
                uint64_t d = unary();
                v = d == 0 ? fail("EvalError", "division by zero") : v / d;
            } else if (eat("%")) {
                uint64_t d = unary();
                v = d == 0 ? fail("EvalError", "division by zero") : v % d;
            } else {
                return v;
            }
        }
    }

    uint64_t addsub() {
        uint64_t v = muldiv();
        for (;;) {
            if (eat("+")) v = v + muldiv();
            else if (eat("-")) v = v - muldiv();
            else return v;
        }
    }

    uint64_t shift() {
        uint64_t v = addsub();
        for (;;) {
            if (eat("<<")) {
                uint64_t s = addsub();
                v = s >= 64 ? 0 : v << s;
            } else if (eat(">>")) {
                uint64_t s = addsub();
                v = s >= 64 ? 0 : v >> s;
            } else {
                return v;
            }
        }
    }

    uint64_t relational() {
        uint64_t v = shift();
        for (;;) {
            if (eat("<")) v = v < shift() ? 1 : 0;
            else if (eat("<=")) v = v <= shift() ? 1 : 0;
            else if (eat(">")) v = v > shift() ? 1 : 0;
            else if (eat(">=")) v = v >= shift() ? 1 : 0;
            else return v;
        }
    }

    uint64_t equality() {
        uint64_t v = relational();
        for (;;) {
            if (eat("==") || eat("===")) v = v == relational() ? 1 : 0;
            else if (eat("!=") || eat("!==")) v = v != relational() ? 1 : 0;
            else return v;
        }
    }

    uint64_t bit_and() {
        uint64_t v = equality();
        while (eat("&")) v = v & equality();
        return v;
    }

    uint64_t bit_xor() {
        // xnor spellings lex as '^' '~', handled by the unary complement.
        uint64_t v = bit_and();
        while (eat("^")) v = v ^ bit_and();
        return v;
    }

    uint64_t bit_or() {
        uint64_t v = bit_xor();
        while (eat("|")) v = v | bit_xor();
        return v;
    }

    uint64_t logic_and() {
        uint64_t v = bit_or();
        while (eat("&&")) {
            uint64_t r = bit_or();
            v = (v != 0 && r != 0) ? 1 : 0;
        }
        return v;
    }

    uint64_t logic_or() {
        uint64_t v = logic_and();
        while (eat("||")) {
            uint64_t r = logic_and();
            v = (v != 0 || r != 0) ? 1 : 0;
        }
        return v;
    }

    uint64_t ternary() {
        uint64_t c = logic_or();
        if (!eat("?")) return c;
        uint64_t t = ternary();
        if (!eat(":")) return fail("EvalError", "missing : in ternary");
        uint64_t f = ternary();
        return c != 0 ? t : f;
    }
};

} // namespace

Result<uint64_t> eval_expr(const std::string& expr, const std::map<std::string, uint64_t>& env) {
    auto toks = verisure::tokenize_verilog(expr);
    if (!toks.ok()) return toks.error();
    Eval ev{toks.value(), env};
    uint64_t v = ev.ternary();
    if (ev.err) return *ev.err;
    if (ev.pos != ev.toks.size())
        return verisure::make_error("EvalError", "trailing tokens after expression",
                                    ev.toks[ev.pos].text);
    return v;
}

} // namespace testsupport
