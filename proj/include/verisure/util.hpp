// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace verisure {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view text);
bool starts_with(std::string_view s, std::string_view prefix);

/// Legal RTL identifier: [A-Za-z_][A-Za-z0-9_$]*.
bool is_identifier(std::string_view s);

std::optional<std::string> read_file(const std::string& path);
bool write_file(const std::string& path, std::string_view content);

} // namespace verisure
