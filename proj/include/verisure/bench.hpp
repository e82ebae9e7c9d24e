// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "verisure/common.hpp"
#include "verisure/contract.hpp" // Json

namespace verisure {

struct ComplexityMetrics {
    int64_t loc = 0;      // non-blank, non-comment-only lines
    int64_t n_assign = 0; // continuous assignments
    int64_t n_always = 0; // procedural blocks
    int64_t n_case = 0;   // case/casez/casex statements
    int64_t max_width = 0;
    bool width_warning = false; // a parametric range had to be defaulted

    bool operator==(const ComplexityMetrics&) const = default;
};

enum class Difficulty { Easy, Medium, Hard };

std::string to_string(Difficulty d);
std::optional<Difficulty> parse_difficulty(std::string_view s);

struct DifficultyLabel {
    int score = 0;
    Difficulty label = Difficulty::Easy;
    int s_loc = 0;
    int s_assign = 0;
    int s_always = 0;
    int s_case = 0;
    int s_width = 0;

    bool operator==(const DifficultyLabel&) const = default;
};

Result<ComplexityMetrics> measure(const std::string& source);

/// Threshold table: s_loc ≤10→0, 11–30→1, 31–60→2, >60→3; s_assign ≤1→0,
/// 2–4→1, ≥5→2; s_always/s_case 0,1,2,≥3→0,1,2,3; s_width ≤32→0, 33–128→1,
/// >128→2. Labels: Easy S≤1, Medium 2≤S≤3, Hard S≥4.
DifficultyLabel score(const ComplexityMetrics& metrics);

struct ProblemManifest {
    std::string id;
    std::string dir;
    std::string prompt;
    std::string interface_stub; // optional stub.sv contents
    std::string testbench_path;
    std::string reference_path; // empty when absent
    std::optional<DifficultyLabel> difficulty;
    std::string success_regex;
    std::string top;
    std::vector<Error> warnings;
};

struct ManifestLoad {
    std::vector<ProblemManifest> manifests; // sorted by id
    std::vector<Error> errors;              // per-problem failures, non-fatal
};

/// Scans per-problem subdirectories holding prompt.txt, testbench.sv,
/// optional ref.sv, stub.sv and meta.json ({difficulty, success_regex, top}).
/// A meta difficulty wins over one computed from ref.sv; disagreement leaves
/// a warning on the manifest.
ManifestLoad load_manifests(const std::string& dir);

Json metrics_to_json(const ComplexityMetrics& m, const DifficultyLabel& label);

} // namespace verisure
