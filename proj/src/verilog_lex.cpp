// SPDX-License-Identifier: Apache-2.0
#include "verisure/verilog.hpp"

#include <array>
#include <cctype>
#include <cstring>
#include <unordered_set>

namespace verisure {

bool is_verilog_keyword(std::string_view word) {
    static const std::unordered_set<std::string_view> kw = {
        "module", "endmodule", "macromodule", "primitive", "endprimitive",
        "input", "output", "inout", "wire", "reg", "logic", "integer", "real",
        "realtime", "time", "genvar", "parameter", "localparam", "defparam",
        "specparam", "event", "tri", "tri0", "tri1", "triand", "trior", "trireg",
        "wand", "wor", "supply0", "supply1", "signed", "unsigned", "scalared",
        "vectored", "bit", "byte", "shortint", "int", "longint", "shortreal",
        "var", "void", "typedef", "enum", "struct", "union", "packed",
        "always", "always_ff", "always_comb", "always_latch", "initial", "final",
        "assign", "deassign", "force", "release", "begin", "end", "if", "else",
        "case", "casez", "casex", "endcase", "default", "for", "while", "repeat",
        "forever", "do", "wait", "disable", "fork", "join", "join_any", "join_none",
        "posedge", "negedge", "edge", "or", "and", "not", "nand", "nor", "xor",
        "xnor", "buf", "bufif0", "bufif1", "notif0", "notif1", "pullup", "pulldown",
        "function", "endfunction", "task", "endtask", "return", "automatic",
        "generate", "endgenerate", "specify", "endspecify", "assert", "assume",
        "cover", "property", "endproperty", "sequence", "endsequence", "bind",
        "unique", "unique0", "priority", "const", "static", "string", "iff",
        "inside", "interface", "endinterface", "modport", "package", "endpackage",
        "import", "export", "localparam", "casex",
    };
    return kw.count(word) > 0;
}

namespace {

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool base_digit(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '?' ||
           c == 'x' || c == 'X' || c == 'z' || c == 'Z';
}

// Longest-match punctuation. Ordered by length so scanning can stop at the
// first hit.
constexpr std::string_view kPuncts[] = {
    "<<<=", ">>>=",
    "===", "!==", "==?", "!=?", "<<<", ">>>", "<<=", ">>=", "->>",
    "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "->", "+:", "-:", "::",
    "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "**", "##",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "=", "?", ":",
    ";", ",", ".", "#", "@", "(", ")", "[", "]", "{", "}",
};

} // namespace

Result<std::vector<Token>> tokenize_verilog(const std::string& src) {
    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;

    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n && i < src.size(); k++, i++) {
            if (src[i] == '\n') {
                line++;
                col = 1;
            } else {
                col++;
            }
        }
    };

    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            int start_line = line, start_col = col;
            advance(2);
            while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
            if (i + 1 >= src.size()) {
                return make_error("SyntaxError", "unterminated block comment",
                                  std::to_string(start_line) + ":" + std::to_string(start_col));
            }
            advance(2);
            continue;
        }

        Token tok;
        tok.line = line;
        tok.col = col;
        tok.offset = i;

        if (c == '`') {
            // Line directives (`define etc.) run to end of line with backslash
            // continuations; anything else after a backtick is a macro use and
            // stays a single short token.
            static const std::unordered_set<std::string_view> line_directives = {
                "`define", "`include", "`timescale", "`ifdef", "`ifndef", "`else",
                "`elsif", "`endif", "`undef", "`default_nettype", "`resetall",
                "`celldefine", "`endcelldefine", "`pragma", "`line",
            };
            size_t start = i;
            advance(1);
            while (i < src.size() && ident_char(src[i])) advance(1);
            std::string name = src.substr(start, i - start);
            if (line_directives.count(name)) {
                while (i < src.size() && src[i] != '\n') advance(1);
                while (i > start && src[i - 1] == '\\' && i < src.size()) {
                    advance(1);
                    while (i < src.size() && src[i] != '\n') advance(1);
                }
            }
            tok.kind = TokKind::Directive;
            tok.text = src.substr(start, i - start);
            out.push_back(std::move(tok));
            continue;
        }
        if (c == '\\') {
            // Escaped identifier: backslash to next whitespace.
            size_t start = i;
            advance(1);
            while (i < src.size() && !std::isspace(static_cast<unsigned char>(src[i]))) advance(1);
            tok.kind = TokKind::Identifier;
            tok.text = src.substr(start + 1, i - start - 1);
            out.push_back(std::move(tok));
            continue;
        }
        if (ident_start(c)) {
            size_t start = i;
            while (i < src.size() && ident_char(src[i])) advance(1);
            tok.kind = TokKind::Identifier;
            tok.text = src.substr(start, i - start);
            out.push_back(std::move(tok));
            continue;
        }
        if (c == '$') {
            size_t start = i;
            advance(1);
            while (i < src.size() && ident_char(src[i])) advance(1);
            tok.kind = TokKind::SystemId;
            tok.text = src.substr(start, i - start);
            out.push_back(std::move(tok));
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
            size_t start = i;
            if (std::isdigit(static_cast<unsigned char>(c))) {
                while (i < src.size() &&
                       (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '_'))
                    advance(1);
                // Real literal: 1.5, 2e9. A '.' followed by a digit belongs to
                // the number; a lone '.' is member access.
                if (i + 1 < src.size() && src[i] == '.' &&
                    std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
                    advance(1);
                    while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i])))
                        advance(1);
                }
                if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                    size_t save = i;
                    advance(1);
                    if (i < src.size() && (src[i] == '+' || src[i] == '-')) advance(1);
                    if (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
                        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i])))
                            advance(1);
                    } else {
                        i = save; // not an exponent
                    }
                }
            }
            if (i < src.size() && src[i] == '\'') {
                size_t save = i;
                advance(1);
                if (i < src.size() && (src[i] == 's' || src[i] == 'S')) advance(1);
                if (i < src.size() && std::strchr("bodhBODH", src[i])) {
                    advance(1);
                    while (i < src.size() && base_digit(src[i])) advance(1);
                } else if (i < src.size() &&
                           (src[i] == '0' || src[i] == '1' || src[i] == 'x' || src[i] == 'X' ||
                            src[i] == 'z' || src[i] == 'Z')) {
                    advance(1); // unbased unsized literal '0 '1 'x 'z
                } else {
                    i = save; // bare quote is not ours (shouldn't occur)
                    if (start == i) {
                        return make_error("SyntaxError", "stray quote",
                                          std::to_string(tok.line) + ":" + std::to_string(tok.col));
                    }
                }
            }
            tok.kind = TokKind::Number;
            tok.text = src.substr(start, i - start);
            out.push_back(std::move(tok));
            continue;
        }
        if (c == '"') {
            size_t start = i;
            advance(1);
            while (i < src.size() && src[i] != '"') {
                if (src[i] == '\\') advance(1);
                advance(1);
            }
            if (i >= src.size()) {
                return make_error("SyntaxError", "unterminated string",
                                  std::to_string(tok.line) + ":" + std::to_string(tok.col));
            }
            advance(1);
            tok.kind = TokKind::String;
            tok.text = src.substr(start, i - start);
            out.push_back(std::move(tok));
            continue;
        }

        bool matched = false;
        for (const auto& p : kPuncts) {
            if (src.compare(i, p.size(), p) == 0) {
                tok.kind = TokKind::Punct;
                tok.text = std::string(p);
                advance(p.size());
                out.push_back(std::move(tok));
                matched = true;
                break;
            }
        }
        if (!matched) {
            return make_error("SyntaxError",
                              std::string("unexpected character '") + c + "'",
                              std::to_string(line) + ":" + std::to_string(col));
        }
    }
    return out;
}

} // namespace verisure
