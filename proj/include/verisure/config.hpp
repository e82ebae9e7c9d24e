// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "json.hpp"

#include "verisure/common.hpp"

namespace verisure {

struct LlmConfig {
    std::string base_url; // empty means no live backend
    std::string api_key;
    std::string model = "default";

    bool operator==(const LlmConfig&) const = default;
};

/// Session-wide knobs. Defaults: slice depth 3, window of 8 clock cycles,
/// 10 repair iterations, formal branch on, external simulator, 1 job.
struct GlobalConfig {
    int d_max = 3;
    int window_k = 8;
    int max_iterations = 10;
    bool formal_enabled = true;
    std::string sim_backend = "external"; // external | scripted
    std::string sim_fixture;              // scripted backend replay file
    LlmConfig llm;
    int jobs = 1;

    bool operator==(const GlobalConfig&) const = default;
};

/// Environment layer: LLM settings from VERISURE_LLM_BASE_URL / _API_KEY /
/// _MODEL on top of the defaults.
GlobalConfig config_from_env();

/// Applies a JSON config object over `base`. Unknown keys at any level are
/// rejected (UnknownConfigKey); non-positive numeric fields are BadConfig.
Result<GlobalConfig> apply_config_json(const nlohmann::ordered_json& j, GlobalConfig base);

/// File layer over env layer over defaults.
Result<GlobalConfig> load_config(const std::string& path);

nlohmann::ordered_json config_to_json(const GlobalConfig& c);

} // namespace verisure
