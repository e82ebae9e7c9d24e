// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "verisure/common.hpp"

namespace testsupport {

/// Desk-scale Verilog expression evaluator used as an independent oracle for
/// miter and counterexample claims. Values are 64-bit two-state; relational
/// and logical operators yield 0/1. Supports | & ^ ~ ^~ && || ! == != === !==
/// relational, shifts, +-*/%, ternary, parens, unary reductions, decimal and
/// based literals. Unknown identifiers and x/z digits are errors.
verisure::Result<uint64_t> eval_expr(const std::string& expr,
                                     const std::map<std::string, uint64_t>& env);

} // namespace testsupport
