// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "verisure/common.hpp"

namespace verisure {

/// Hardware logic vector over {0,1,x,z}. `bits` is MSB-first and its length
/// always equals `width`.
struct FourStateValue {
    int width = 1;
    std::string bits = "x";

    static FourStateValue all_x(int width);
    /// VCD left-extension: shorter values extend with 0, or with x/z when the
    /// leftmost bit is x/z; longer values keep the low `width` bits.
    static FourStateValue from_vcd(std::string_view raw, int width);

    bool is_fully_defined() const;
    /// Binary for width <= 4, "0x.." hex otherwise (nibbles holding x/z render
    /// as the letter).
    std::string display() const;

    bool operator==(const FourStateValue&) const = default;
};

struct VcdVar {
    std::string code;
    std::string name;
    std::string scope;
    int width = 1;

    std::string full_path() const { return scope.empty() ? name : scope + "." + name; }
};

class VcdDatabase {
public:
    /// Signal lookup: exact full path first, then declaration-order first
    /// match on the unscoped name.
    bool has_signal(const std::string& name) const;
    /// Value at time t with last-change-wins, step-function semantics.
    /// All-x before the first recorded change.
    FourStateValue value_at(const std::string& name, uint64_t t) const;
    std::vector<uint64_t> change_times(const std::string& name) const;
    std::vector<std::pair<uint64_t, FourStateValue>> series(const std::string& name) const;
    int width_of(const std::string& name) const;

    const std::vector<VcdVar>& vars() const { return vars_; }
    const std::vector<Error>& warnings() const { return warnings_; }
    const std::string& timescale() const { return timescale_; }

private:
    friend Result<VcdDatabase> parse_vcd(const std::string& data);

    const VcdVar* find(const std::string& name) const;

    std::vector<VcdVar> vars_;
    std::map<std::string, std::vector<std::pair<uint64_t, FourStateValue>>> changes_;
    std::vector<Error> warnings_;
    std::string timescale_;
};

Result<VcdDatabase> parse_vcd(const std::string& data);

} // namespace verisure
