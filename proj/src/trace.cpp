// SPDX-License-Identifier: Apache-2.0
#include "verisure/trace.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include "verisure/sim_runner.hpp"

namespace verisure {

namespace {

char last_bit(const FourStateValue& v) { return v.bits.empty() ? 'x' : v.bits.back(); }

bool rows_equal(const std::vector<FourStateValue>& a, const std::vector<FourStateValue>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] == b[i])) return false;
    }
    return true;
}

} // namespace

std::optional<uint64_t> first_divergence(
    const std::vector<uint64_t>& times, const std::vector<std::vector<FourStateValue>>& observed,
    const std::vector<std::vector<FourStateValue>>& expected) {
    size_t n = std::min({times.size(), observed.size(), expected.size()});
    for (size_t i = 0; i < n; ++i) {
        if (!rows_equal(observed[i], expected[i])) return times[i];
    }
    return std::nullopt;
}

Result<TraceWindow> extract_window(const VcdDatabase& db, const ClockingSpec& clocking,
                                   uint64_t t_f, int k_cycles,
                                   const std::vector<std::string>& signals) {
    if (!clocking.clock || !clocking.clock->name) {
        return make_error("ClockNotFound", "contract defines no clock", "clocking.clock");
    }
    const std::string& clock = *clocking.clock->name;
    if (!db.has_signal(clock)) {
        return make_error("ClockNotFound", "clock '" + clock + "' not present in VCD", clock);
    }
    bool rising = true;
    if (clocking.clock->edge && parse_edge(*clocking.clock->edge)) {
        rising = clocking.clock->edge_enum() == ClockEdge::Posedge;
    }

    auto series = db.series(clock);
    std::vector<uint64_t> edges;
    char prev = 'x';
    for (const auto& [t, value] : series) {
        char cur = last_bit(value);
        if (rising ? (cur == '1' && prev != '1') : (cur == '0' && prev != '0')) {
            edges.push_back(t);
        }
        prev = cur;
    }

    TraceWindow window;
    std::vector<uint64_t> diffs;
    for (size_t i = 1; i < edges.size(); ++i) diffs.push_back(edges[i] - edges[i - 1]);
    if (diffs.empty()) {
        window.clock_period = 0;
        window.warnings.push_back(make_error(
            "NonUniformClock", "fewer than two active edges of '" + clock + "' in the dump",
            clock));
    } else {
        std::vector<uint64_t> sorted = diffs;
        std::sort(sorted.begin(), sorted.end());
        window.clock_period = sorted[(sorted.size() - 1) / 2];
        bool uniform = std::all_of(diffs.begin(), diffs.end(),
                                   [&](uint64_t d) { return d == window.clock_period; });
        if (!uniform) {
            window.warnings.push_back(make_error(
                "NonUniformClock",
                "edge spacing of '" + clock + "' varies; using median " +
                    std::to_string(window.clock_period),
                clock));
        }
    }

    uint64_t span = static_cast<uint64_t>(k_cycles) * window.clock_period;
    uint64_t lower = (window.clock_period > 0 && t_f >= span) ? t_f - span : 0;
    for (uint64_t e : edges) {
        if (e >= lower && e <= t_f) window.sample_times.push_back(e);
    }

    std::set<std::string> seen;
    for (const auto& name : signals) {
        if (!seen.insert(name).second) continue;
        if (!db.has_signal(name)) {
            window.warnings.push_back(
                make_error("SignalNotInVcd", "signal '" + name + "' not present in VCD", name));
            continue;
        }
        std::vector<FourStateValue> values;
        values.reserve(window.sample_times.size());
        for (uint64_t t : window.sample_times) values.push_back(db.value_at(name, t));
        bool constant = values.size() >= 2 &&
                        std::all_of(values.begin(), values.end(),
                                    [&](const FourStateValue& v) { return v == values.front(); });
        if (constant) {
            window.elided.push_back(name);
            window.elided_values[name] = values.front().display();
        } else {
            window.signals.emplace_back(name, std::move(values));
        }
    }
    return window;
}

std::optional<AlignmentHint> alignment_check(const std::vector<FourStateValue>& observed,
                                             const std::vector<FourStateValue>& expected) {
    size_t n = std::min(observed.size(), expected.size());
    if (n < 4) return std::nullopt;

    AlignmentHint hint;
    for (int delta = -2; delta <= 2; ++delta) {
        int score = 0;
        for (size_t i = 0; i < n; ++i) {
            long shifted = static_cast<long>(i) - delta;
            if (shifted < 0 || shifted >= static_cast<long>(n)) continue;
            if (!(observed[i] == expected[static_cast<size_t>(shifted)])) ++score;
        }
        hint.scores[delta] = score;
    }
    // Smaller |δ| wins ties, then negative before positive.
    const int order[] = {0, -1, 1, -2, 2};
    hint.best_delta = 0;
    for (int delta : order) {
        if (hint.scores[delta] < hint.scores[hint.best_delta]) hint.best_delta = delta;
    }
    int s0 = hint.scores[0];
    int sb = hint.scores[hint.best_delta];
    hint.significant = hint.best_delta != 0 && 2 * sb <= s0 && s0 - sb >= 2;
    return hint;
}

std::string hint_text(const AlignmentHint& hint) {
    int d = hint.best_delta;
    int n = std::abs(d);
    std::string head = "best alignment at δ=";
    if (d > 0) head += "+";
    else if (d < 0) head += "-";
    head += std::to_string(n);
    if (d == 0) return head + ": no consistent shift";
    return head + ": output appears " + std::to_string(n) + (n == 1 ? " cycle" : " cycles") +
           (d > 0 ? " late" : " early");
}

namespace {

const char* kGoldenSuffixes[] = {"_expected", "_ref", "_exp", "_golden"};
const char* kGoldenPrefixes[] = {"expected_", "ref_", "golden_"};

std::string find_golden_signal(const VcdDatabase& db, const std::string& name) {
    for (const char* suffix : kGoldenSuffixes) {
        std::string candidate = name + suffix;
        if (db.has_signal(candidate)) return candidate;
    }
    for (const char* prefix : kGoldenPrefixes) {
        std::string candidate = prefix + name;
        if (db.has_signal(candidate)) return candidate;
    }
    return {};
}

} // namespace

TraceReport build_report(const VcdDatabase* db, const std::string& logs,
                         const DesignContract& contract, const DependencyGraph& graph,
                         const SuspectSet& suspects, int k_cycles) {
    TraceReport rep;
    rep.suspects = suspects;
    for (size_t i = 0; i < suspects.block_ids.size(); ++i) {
        SuspectRow row;
        row.id = suspects.block_ids[i];
        if (const RtlBlock* b = graph.block_by_id(row.id)) {
            row.kind = to_string(b->kind);
            row.start_line = b->start_line;
            row.end_line = b->end_line;
        } else if (i < suspects.line_ranges.size()) {
            row.start_line = suspects.line_ranges[i].first;
            row.end_line = suspects.line_ranges[i].second;
        }
        rep.suspect_rows.push_back(row);
    }

    LogFindings findings = parse_log(logs);
    rep.t_f = findings.first_failure_time;
    std::set<std::string> seen;
    for (const auto& m : findings.mismatches) {
        if (!m.has_details || !seen.insert(m.signal).second) continue;
        rep.failing_signals.push_back({m.signal, m.observed, m.expected});
    }
    if (!rep.failing_signals.empty()) rep.expected_source = "log";

    if (!db) {
        rep.diagnostics = logs;
        return rep;
    }
    if (!rep.t_f) {
        rep.diagnostics = logs;
        rep.warnings.push_back(
            make_error("NoFailureTime", "no failure timestamp parsed from the log"));
        return rep;
    }
    if (!contract.clocking || !contract.clocking->clock) {
        rep.warnings.push_back(
            make_error("NoClock", "contract has no clock; waveform window skipped"));
        return rep;
    }

    // Window columns: failing outputs (all contract outputs when unknown),
    // then top-level inputs, then suspect-block reads/writes.
    std::vector<std::string> columns;
    if (!rep.failing_signals.empty()) {
        for (const auto& f : rep.failing_signals) columns.push_back(f.name);
    } else if (contract.io) {
        for (const auto& p : *contract.io) {
            if (p.name && p.dir && parse_dir(*p.dir) == PortDir::Output) {
                columns.push_back(*p.name);
            }
        }
    }
    if (contract.io) {
        for (const auto& p : *contract.io) {
            if (p.name && p.dir && parse_dir(*p.dir) == PortDir::Input) {
                columns.push_back(*p.name);
            }
        }
    }
    std::set<std::string> suspect_signals;
    for (int id : suspects.block_ids) {
        if (const RtlBlock* b = graph.block_by_id(id)) {
            suspect_signals.insert(b->reads.begin(), b->reads.end());
            suspect_signals.insert(b->writes.begin(), b->writes.end());
        }
    }
    columns.insert(columns.end(), suspect_signals.begin(), suspect_signals.end());

    auto window = extract_window(*db, *contract.clocking, *rep.t_f, k_cycles, columns);
    if (!window.ok()) {
        rep.warnings.push_back(window.error());
    } else {
        rep.window = window.take();
    }

    for (const auto& f : rep.failing_signals) {
        if (!db->has_signal(f.name)) continue;
        std::string golden = find_golden_signal(*db, f.name);
        if (golden.empty() || !rep.window) continue;
        std::vector<FourStateValue> obs, exp;
        for (uint64_t t : rep.window->sample_times) {
            obs.push_back(db->value_at(f.name, t));
            exp.push_back(db->value_at(golden, t));
        }
        rep.alignment = alignment_check(obs, exp);
        if (rep.alignment) {
            rep.expected_source = "vcd";
            break;
        }
    }
    return rep;
}

namespace {

std::string pad(const std::string& s, size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string format_delta(int delta) {
    std::string out = "δ=";
    if (delta > 0) out += "+";
    out += std::to_string(delta);
    return out;
}

} // namespace

std::string render_report(const TraceReport& report) {
    std::ostringstream out;

    out << "FAILURE\n";
    if (report.t_f) {
        out << "  first divergence: t=" << *report.t_f << "\n";
    } else {
        out << "  t_f: (not determined)\n";
    }
    for (const auto& f : report.failing_signals) {
        out << "  " << f.name << ": observed=" << f.observed;
        if (!f.expected.empty()) out << " expected=" << f.expected;
        out << "\n";
    }
    if (!report.expected_source.empty()) {
        out << "  expected-value source: " << report.expected_source << "\n";
    }
    if (!report.diagnostics.empty()) {
        out << "  raw diagnostics:\n" << report.diagnostics;
        if (report.diagnostics.back() != '\n') out << "\n";
    }

    out << "ALIGNMENT\n";
    if (report.alignment) {
        for (const auto& [delta, score] : report.alignment->scores) {
            out << "  " << format_delta(delta) << ": " << score << "\n";
        }
        out << "  " << hint_text(*report.alignment) << "\n";
        out << "  significant: " << (report.alignment->significant ? "yes" : "no") << "\n";
    } else {
        out << "  (no alignment hint)\n";
    }

    out << "TRACE\n";
    if (report.window && !report.window->sample_times.empty()) {
        const TraceWindow& w = *report.window;
        out << "  clock period: " << w.clock_period << "\n";
        std::vector<std::string> headers = {"time"};
        for (const auto& [name, values] : w.signals) headers.push_back(name);
        std::vector<std::vector<std::string>> rows;
        for (size_t i = 0; i < w.sample_times.size(); ++i) {
            std::vector<std::string> row = {std::to_string(w.sample_times[i])};
            for (const auto& [name, values] : w.signals) row.push_back(values[i].display());
            rows.push_back(std::move(row));
        }
        std::vector<size_t> widths(headers.size());
        for (size_t c = 0; c < headers.size(); ++c) {
            widths[c] = headers[c].size();
            for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
        }
        auto emit_row = [&](const std::vector<std::string>& row) {
            out << " ";
            for (size_t c = 0; c < row.size(); ++c) {
                out << " " << pad(row[c], widths[c]);
                if (c + 1 < row.size()) out << " |";
            }
            out << "\n";
        };
        emit_row(headers);
        for (const auto& row : rows) emit_row(row);
        if (!w.elided.empty()) {
            out << "  constant over window:";
            for (size_t i = 0; i < w.elided.size(); ++i) {
                out << (i == 0 ? " " : ", ") << w.elided[i] << "="
                    << w.elided_values.at(w.elided[i]);
            }
            out << "\n";
        }
    } else {
        out << "  (no waveform window)\n";
    }

    out << "SUSPECTS\n";
    if (report.suspect_rows.empty()) {
        out << "  (none)\n";
    } else {
        for (const auto& row : report.suspect_rows) {
            out << "  block " << row.id;
            if (!row.kind.empty()) out << " (" << row.kind << ")";
            out << " lines " << row.start_line << "-" << row.end_line << "\n";
        }
    }
    if (!report.suspects.seed_signals.empty()) {
        out << "  seed signals:";
        for (size_t i = 0; i < report.suspects.seed_signals.size(); ++i) {
            out << (i == 0 ? " " : ", ") << report.suspects.seed_signals[i];
        }
        out << "\n";
    }
    out << "  slice depth: " << report.suspects.depth_used << "\n";

    for (const auto& w : report.warnings) {
        out << "  warning " << w.code << ": " << w.message << "\n";
    }
    return out.str();
}

Json report_to_json(const TraceReport& report) {
    Json j = Json::object();
    j["t_f"] = report.t_f ? Json(*report.t_f) : Json(nullptr);
    j["failing_signals"] = Json::array();
    for (const auto& f : report.failing_signals) {
        Json entry = Json::object();
        entry["name"] = f.name;
        entry["observed"] = f.observed;
        entry["expected"] = f.expected.empty() ? Json(nullptr) : Json(f.expected);
        j["failing_signals"].push_back(std::move(entry));
    }
    if (report.alignment) {
        Json a = Json::object();
        Json scores = Json::object();
        for (const auto& [delta, score] : report.alignment->scores) {
            std::string key = delta > 0 ? "+" + std::to_string(delta) : std::to_string(delta);
            scores[key] = score;
        }
        a["scores"] = std::move(scores);
        a["best_delta"] = report.alignment->best_delta;
        a["significant"] = report.alignment->significant;
        a["hint"] = hint_text(*report.alignment);
        j["alignment"] = std::move(a);
    } else {
        j["alignment"] = nullptr;
    }
    if (report.window) {
        const TraceWindow& w = *report.window;
        Json win = Json::object();
        win["clock_period"] = w.clock_period;
        win["sample_times"] = w.sample_times;
        Json sigs = Json::object();
        for (const auto& [name, values] : w.signals) {
            Json list = Json::array();
            for (const auto& v : values) list.push_back(v.display());
            sigs[name] = std::move(list);
        }
        win["signals"] = std::move(sigs);
        Json elided = Json::object();
        for (const auto& name : w.elided) elided[name] = w.elided_values.at(name);
        win["elided"] = std::move(elided);
        j["window"] = std::move(win);
    } else {
        j["window"] = nullptr;
    }
    Json sus = Json::object();
    sus["seed_signals"] = report.suspects.seed_signals;
    sus["depth_used"] = report.suspects.depth_used;
    Json blocks = Json::array();
    for (const auto& row : report.suspect_rows) {
        Json b = Json::object();
        b["id"] = row.id;
        b["kind"] = row.kind;
        b["lines"] = Json::array({row.start_line, row.end_line});
        blocks.push_back(std::move(b));
    }
    sus["blocks"] = std::move(blocks);
    j["suspects"] = std::move(sus);
    j["expected_source"] = report.expected_source;
    if (!report.diagnostics.empty()) j["diagnostics"] = report.diagnostics;
    Json warnings = Json::array();
    for (const auto& w : report.warnings) {
        Json entry = Json::object();
        entry["code"] = w.code;
        entry["message"] = w.message;
        warnings.push_back(std::move(entry));
    }
    j["warnings"] = std::move(warnings);
    return j;
}

} // namespace verisure
