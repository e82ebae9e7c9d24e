// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "verisure/common.hpp"

namespace verisure {

enum class TokKind { Identifier, SystemId, Number, String, Punct, Directive };

struct Token {
    TokKind kind;
    std::string text;
    int line = 1;
    int col = 1;
    size_t offset = 0;

    bool is(std::string_view t) const { return text == t; }
    bool is_ident(std::string_view t) const { return kind == TokKind::Identifier && text == t; }
};

/// Tokenize Verilog/SystemVerilog source. Comments and whitespace are
/// dropped; compiler directives (`timescale etc.) become Directive tokens
/// spanning to end of line. Errors carry "line:col" in path.
Result<std::vector<Token>> tokenize_verilog(const std::string& source);

bool is_verilog_keyword(std::string_view word);

} // namespace verisure
