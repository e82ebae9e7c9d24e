// SPDX-License-Identifier: Apache-2.0
#include "verisure/bench.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>

#include "verisure/rtl_graph.hpp"
#include "verisure/util.hpp"

namespace fs = std::filesystem;

namespace verisure {

std::string to_string(Difficulty d) {
    switch (d) {
    case Difficulty::Easy: return "Easy";
    case Difficulty::Medium: return "Medium";
    case Difficulty::Hard: return "Hard";
    }
    return "Easy";
}

std::optional<Difficulty> parse_difficulty(std::string_view s) {
    if (s == "Easy" || s == "easy") return Difficulty::Easy;
    if (s == "Medium" || s == "medium") return Difficulty::Medium;
    if (s == "Hard" || s == "hard") return Difficulty::Hard;
    return std::nullopt;
}

namespace {

/// Lines of code: a line counts when something non-whitespace survives
/// comment removal.
int64_t count_loc(const std::string& source) {
    int64_t loc = 0;
    bool line_has_code = false;
    bool in_block_comment = false;
    size_t i = 0;
    auto end_line = [&]() {
        if (line_has_code) ++loc;
        line_has_code = false;
    };
    while (i < source.size()) {
        char c = source[i];
        if (c == '\n') {
            end_line();
            ++i;
            continue;
        }
        if (in_block_comment) {
            if (c == '*' && i + 1 < source.size() && source[i + 1] == '/') {
                in_block_comment = false;
                ++i;
            }
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < source.size() && source[i + 1] == '/') {
            while (i < source.size() && source[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < source.size() && source[i + 1] == '*') {
            in_block_comment = true;
            i += 2;
            continue;
        }
        if (!std::isspace(static_cast<unsigned char>(c))) line_has_code = true;
        ++i;
    }
    end_line();
    return loc;
}

} // namespace

Result<ComplexityMetrics> measure(const std::string& source) {
    auto analyzed = analyze_rtl(source);
    if (!analyzed.ok()) return analyzed.error();
    const RtlFile& file = analyzed.value();

    ComplexityMetrics m;
    m.loc = count_loc(source);
    for (const auto& block : file.blocks) {
        switch (block.kind) {
        case BlockKind::ContinuousAssign: ++m.n_assign; break;
        case BlockKind::AlwaysFf:
        case BlockKind::AlwaysComb:
        case BlockKind::AlwaysLatch:
        case BlockKind::AlwaysGeneric: ++m.n_always; break;
        case BlockKind::ModuleInstance: break;
        }
        m.n_case += block.case_count;
    }
    m.max_width = file.max_declared_width;
    bool any_signal = !file.blocks.empty();
    for (const auto& mod : file.modules) any_signal = any_signal || !mod.ports.empty();
    if (any_signal && m.max_width < 1) m.max_width = 1;
    m.width_warning = file.width_warning;
    return m;
}

DifficultyLabel score(const ComplexityMetrics& metrics) {
    DifficultyLabel out;
    if (metrics.loc <= 10) out.s_loc = 0;
    else if (metrics.loc <= 30) out.s_loc = 1;
    else if (metrics.loc <= 60) out.s_loc = 2;
    else out.s_loc = 3;

    if (metrics.n_assign <= 1) out.s_assign = 0;
    else if (metrics.n_assign <= 4) out.s_assign = 1;
    else out.s_assign = 2;

    out.s_always = metrics.n_always >= 3 ? 3 : static_cast<int>(metrics.n_always);
    out.s_case = metrics.n_case >= 3 ? 3 : static_cast<int>(metrics.n_case);

    if (metrics.max_width <= 32) out.s_width = 0;
    else if (metrics.max_width <= 128) out.s_width = 1;
    else out.s_width = 2;

    out.score = out.s_loc + out.s_assign + out.s_always + out.s_case + out.s_width;
    if (out.score <= 1) out.label = Difficulty::Easy;
    else if (out.score <= 3) out.label = Difficulty::Medium;
    else out.label = Difficulty::Hard;
    return out;
}

ManifestLoad load_manifests(const std::string& dir) {
    ManifestLoad load;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        load.errors.push_back(make_error("ManifestError", "not a directory", dir));
        return load;
    }
    std::vector<std::string> subdirs;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_directory()) subdirs.push_back(entry.path().string());
    }
    std::sort(subdirs.begin(), subdirs.end());

    for (const auto& pdir : subdirs) {
        std::string id = fs::path(pdir).filename().string();
        ProblemManifest m;
        m.id = id;
        m.dir = pdir;

        auto prompt = read_file((fs::path(pdir) / "prompt.txt").string());
        if (!prompt) {
            load.errors.push_back(make_error("ManifestError", "missing prompt.txt", id));
            continue;
        }
        m.prompt = *prompt;

        fs::path tb = fs::path(pdir) / "testbench.sv";
        if (!fs::exists(tb)) {
            load.errors.push_back(make_error("ManifestError", "missing testbench.sv", id));
            continue;
        }
        m.testbench_path = tb.string();

        if (auto stub = read_file((fs::path(pdir) / "stub.sv").string())) {
            m.interface_stub = *stub;
        }

        std::optional<Difficulty> meta_label;
        fs::path meta_path = fs::path(pdir) / "meta.json";
        if (fs::exists(meta_path)) {
            auto raw = read_file(meta_path.string());
            Json meta = raw ? Json::parse(*raw, nullptr, false) : Json(nullptr);
            if (!raw || meta.is_discarded() || !meta.is_object()) {
                m.warnings.push_back(make_error("ManifestError", "unreadable meta.json", id));
            } else {
                if (meta.contains("difficulty") && meta["difficulty"].is_string()) {
                    meta_label = parse_difficulty(meta["difficulty"].get<std::string>());
                    if (!meta_label) {
                        m.warnings.push_back(make_error(
                            "ManifestError",
                            "unknown difficulty '" + meta["difficulty"].get<std::string>() + "'",
                            id));
                    }
                }
                if (meta.contains("success_regex") && meta["success_regex"].is_string()) {
                    m.success_regex = meta["success_regex"].get<std::string>();
                }
                if (meta.contains("top") && meta["top"].is_string()) {
                    m.top = meta["top"].get<std::string>();
                }
            }
        }

        std::optional<DifficultyLabel> computed;
        fs::path ref = fs::path(pdir) / "ref.sv";
        if (fs::exists(ref)) {
            m.reference_path = ref.string();
            if (auto src = read_file(ref.string())) {
                auto metrics = measure(*src);
                if (metrics.ok()) {
                    computed = score(metrics.value());
                } else {
                    m.warnings.push_back(make_error("ManifestError",
                                                    "reference does not parse: " +
                                                        metrics.error().message,
                                                    id));
                }
            }
        }

        if (meta_label) {
            DifficultyLabel label = computed.value_or(DifficultyLabel{});
            label.label = *meta_label;
            if (computed && computed->label != *meta_label) {
                m.warnings.push_back(make_error(
                    "MetaOverride",
                    "meta difficulty " + to_string(*meta_label) + " overrides computed " +
                        to_string(computed->label),
                    id));
            }
            m.difficulty = label;
        } else {
            m.difficulty = computed;
        }
        load.manifests.push_back(std::move(m));
    }
    return load;
}

Json metrics_to_json(const ComplexityMetrics& m, const DifficultyLabel& label) {
    Json j = Json::object();
    j["loc"] = m.loc;
    j["n_assign"] = m.n_assign;
    j["n_always"] = m.n_always;
    j["n_case"] = m.n_case;
    j["max_width"] = m.max_width;
    if (m.width_warning) j["width_warning"] = true;
    Json s = Json::object();
    s["loc"] = label.s_loc;
    s["assign"] = label.s_assign;
    s["always"] = label.s_always;
    s["case"] = label.s_case;
    s["width"] = label.s_width;
    j["sub_scores"] = std::move(s);
    j["score"] = label.score;
    j["difficulty"] = to_string(label.label);
    return j;
}

} // namespace verisure
