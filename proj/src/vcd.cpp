// SPDX-License-Identifier: Apache-2.0
#include "verisure/vcd.hpp"

#include <algorithm>
#include <cctype>

namespace verisure {

namespace {

bool is_value_char(char c) {
    switch (c) {
    case '0': case '1': case 'x': case 'X': case 'z': case 'Z':
        return true;
    default:
        return false;
    }
}

char normalize_bit(char c) {
    if (c == 'X') return 'x';
    if (c == 'Z') return 'z';
    return c;
}

/// Whitespace-delimited token scanner that remembers byte offsets.
struct Scanner {
    const std::string& src;
    size_t pos = 0;
    size_t tok_offset = 0;

    explicit Scanner(const std::string& s) : src(s) {}

    std::optional<std::string_view> next() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        if (pos >= src.size()) return std::nullopt;
        tok_offset = pos;
        size_t start = pos;
        while (pos < src.size() && !std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        return std::string_view(src).substr(start, pos - start);
    }
};

Error vcd_error(const std::string& message, size_t offset) {
    return make_error("VcdError", message, "byte " + std::to_string(offset));
}

} // namespace

FourStateValue FourStateValue::all_x(int width) {
    FourStateValue v;
    v.width = width < 1 ? 1 : width;
    v.bits.assign(static_cast<size_t>(v.width), 'x');
    return v;
}

FourStateValue FourStateValue::from_vcd(std::string_view raw, int width) {
    FourStateValue v;
    v.width = width < 1 ? 1 : width;
    std::string bits;
    bits.reserve(raw.size());
    for (char c : raw) bits.push_back(normalize_bit(c));
    if (bits.empty()) bits = "x";
    size_t w = static_cast<size_t>(v.width);
    if (bits.size() > w) {
        bits = bits.substr(bits.size() - w);
    } else if (bits.size() < w) {
        char fill = (bits.front() == 'x' || bits.front() == 'z') ? bits.front() : '0';
        bits.insert(bits.begin(), w - bits.size(), fill);
    }
    v.bits = std::move(bits);
    return v;
}

bool FourStateValue::is_fully_defined() const {
    return bits.find_first_of("xz") == std::string::npos;
}

std::string FourStateValue::display() const {
    if (width <= 4) return bits;
    std::string out = "0x";
    size_t head = bits.size() % 4;
    std::vector<std::string> nibbles;
    if (head != 0) nibbles.push_back(bits.substr(0, head));
    for (size_t i = head; i < bits.size(); i += 4) nibbles.push_back(bits.substr(i, 4));
    for (const auto& nib : nibbles) {
        if (nib.find('x') != std::string::npos) {
            out.push_back('x');
        } else if (nib.find('z') != std::string::npos) {
            out.push_back('z');
        } else {
            int value = 0;
            for (char c : nib) value = value * 2 + (c - '0');
            out.push_back("0123456789abcdef"[value]);
        }
    }
    return out;
}

const VcdVar* VcdDatabase::find(const std::string& name) const {
    for (const auto& v : vars_) {
        if (v.full_path() == name) return &v;
    }
    for (const auto& v : vars_) {
        if (v.name == name) return &v;
    }
    return nullptr;
}

bool VcdDatabase::has_signal(const std::string& name) const { return find(name) != nullptr; }

int VcdDatabase::width_of(const std::string& name) const {
    const VcdVar* v = find(name);
    return v ? v->width : 0;
}

FourStateValue VcdDatabase::value_at(const std::string& name, uint64_t t) const {
    const VcdVar* v = find(name);
    if (!v) return FourStateValue::all_x(1);
    auto it = changes_.find(v->code);
    if (it == changes_.end() || it->second.empty() || it->second.front().first > t) {
        return FourStateValue::all_x(v->width);
    }
    const auto& series = it->second;
    auto pos = std::upper_bound(series.begin(), series.end(), t,
                                [](uint64_t lhs, const auto& rhs) { return lhs < rhs.first; });
    return std::prev(pos)->second;
}

std::vector<std::pair<uint64_t, FourStateValue>> VcdDatabase::series(const std::string& name) const {
    const VcdVar* v = find(name);
    if (!v) return {};
    auto it = changes_.find(v->code);
    if (it == changes_.end()) return {};
    return it->second;
}

std::vector<uint64_t> VcdDatabase::change_times(const std::string& name) const {
    std::vector<uint64_t> out;
    const VcdVar* v = find(name);
    if (!v) return out;
    auto it = changes_.find(v->code);
    if (it == changes_.end()) return out;
    out.reserve(it->second.size());
    for (const auto& [time, value] : it->second) out.push_back(time);
    return out;
}

Result<VcdDatabase> parse_vcd(const std::string& data) {
    VcdDatabase db;
    Scanner scan(data);
    std::vector<std::string> scope_stack;
    std::map<std::string, int> width_by_code;
    std::vector<std::string> real_codes;
    bool in_definitions = true;
    uint64_t now = 0;
    bool saw_time = false;

    auto scope_path = [&scope_stack]() {
        std::string path;
        for (const auto& s : scope_stack) {
            if (!path.empty()) path.push_back('.');
            path += s;
        }
        return path;
    };

    auto consume_until_end = [&scan]() -> bool {
        while (auto tok = scan.next()) {
            if (*tok == "$end") return true;
        }
        return false;
    };

    auto record_change = [&](const std::string& code, FourStateValue value) {
        auto& series = db.changes_[code];
        if (!series.empty() && series.back().first == now) {
            series.back().second = std::move(value);
        } else {
            series.emplace_back(now, std::move(value));
        }
    };

    while (true) {
        auto tok_opt = scan.next();
        if (!tok_opt) break;
        std::string_view tok = *tok_opt;
        size_t off = scan.tok_offset;

        if (tok == "$timescale") {
            std::string text;
            bool closed = false;
            while (auto t = scan.next()) {
                if (*t == "$end") { closed = true; break; }
                if (!text.empty()) text.push_back(' ');
                text += std::string(*t);
            }
            if (!closed) return vcd_error("unterminated $timescale", off);
            db.timescale_ = text;
        } else if (tok == "$scope") {
            auto kind = scan.next();
            auto name = scan.next();
            if (!kind || !name) return vcd_error("truncated $scope", off);
            scope_stack.push_back(std::string(*name));
            if (!consume_until_end()) return vcd_error("unterminated $scope", off);
        } else if (tok == "$upscope") {
            if (!scope_stack.empty()) scope_stack.pop_back();
            if (!consume_until_end()) return vcd_error("unterminated $upscope", off);
        } else if (tok == "$var") {
            auto type = scan.next();
            auto width_tok = scan.next();
            auto code = scan.next();
            auto name = scan.next();
            if (!type || !width_tok || !code || !name) return vcd_error("truncated $var", off);
            // Optional bit-select / range tokens before $end belong to the name.
            std::string full_name(*name);
            while (auto t = scan.next()) {
                if (*t == "$end") break;
                full_name += std::string(*t);
            }
            if (*type == "real" || *type == "realtime") {
                real_codes.push_back(std::string(*code));
                db.warnings_.push_back(make_error(
                    "RealSkipped", "real-valued signal '" + full_name + "' skipped", full_name));
                continue;
            }
            int width = 0;
            for (char c : *width_tok) {
                if (!std::isdigit(static_cast<unsigned char>(c))) {
                    return vcd_error("bad $var width '" + std::string(*width_tok) + "'", off);
                }
                width = width * 10 + (c - '0');
            }
            if (width < 1) return vcd_error("bad $var width '" + std::string(*width_tok) + "'", off);
            VcdVar var;
            var.code = std::string(*code);
            var.name = full_name;
            var.scope = scope_path();
            var.width = width;
            width_by_code[var.code] = width;
            db.vars_.push_back(std::move(var));
        } else if (tok == "$enddefinitions") {
            in_definitions = false;
            if (!consume_until_end()) return vcd_error("unterminated $enddefinitions", off);
        } else if (tok == "$dumpvars" || tok == "$dumpall" || tok == "$dumpon" || tok == "$dumpoff") {
            // Change records inside the section apply at the current time.
            continue;
        } else if (tok == "$end") {
            continue;
        } else if (!tok.empty() && tok[0] == '$') {
            // $date, $version, $comment and friends.
            if (!consume_until_end()) return vcd_error("unterminated " + std::string(tok), off);
        } else if (tok[0] == '#') {
            uint64_t t = 0;
            if (tok.size() == 1) return vcd_error("empty timestamp", off);
            for (char c : tok.substr(1)) {
                if (!std::isdigit(static_cast<unsigned char>(c))) {
                    return vcd_error("bad timestamp '" + std::string(tok) + "'", off);
                }
                t = t * 10 + static_cast<uint64_t>(c - '0');
            }
            if (saw_time && t < now) return vcd_error("timestamp moves backwards", off);
            now = t;
            saw_time = true;
        } else if (tok[0] == 'b' || tok[0] == 'B') {
            if (in_definitions) return vcd_error("value change before $enddefinitions", off);
            std::string_view raw = tok.substr(1);
            if (raw.empty()) return vcd_error("empty vector value", off);
            for (char c : raw) {
                if (!is_value_char(c) && c != '_') {
                    return vcd_error("bad vector value '" + std::string(tok) + "'", off);
                }
            }
            auto code = scan.next();
            if (!code) return vcd_error("vector value without identifier", off);
            std::string bits;
            for (char c : raw) {
                if (c != '_') bits.push_back(c);
            }
            auto wit = width_by_code.find(std::string(*code));
            if (wit == width_by_code.end()) {
                if (std::find(real_codes.begin(), real_codes.end(), std::string(*code)) !=
                    real_codes.end()) {
                    continue;
                }
                return vcd_error("change for undeclared identifier '" + std::string(*code) + "'",
                                 scan.tok_offset);
            }
            record_change(std::string(*code), FourStateValue::from_vcd(bits, wit->second));
        } else if (tok[0] == 'r' || tok[0] == 'R') {
            auto code = scan.next();
            if (!code) return vcd_error("real value without identifier", off);
            continue;
        } else if (is_value_char(tok[0])) {
            if (in_definitions) return vcd_error("value change before $enddefinitions", off);
            if (tok.size() < 2) return vcd_error("scalar value without identifier", off);
            std::string code(tok.substr(1));
            auto wit = width_by_code.find(code);
            if (wit == width_by_code.end()) {
                if (std::find(real_codes.begin(), real_codes.end(), code) != real_codes.end()) {
                    continue;
                }
                return vcd_error("change for undeclared identifier '" + code + "'", off);
            }
            record_change(code, FourStateValue::from_vcd(tok.substr(0, 1), wit->second));
        } else {
            return vcd_error("unrecognized token '" + std::string(tok) + "'", off);
        }
    }

    for (auto& [code, series] : db.changes_) {
        std::stable_sort(series.begin(), series.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    return db;
}

} // namespace verisure
