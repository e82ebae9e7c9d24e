// SPDX-License-Identifier: Apache-2.0
#include "verisure/config.hpp"

#include <cstdlib>

#include "verisure/util.hpp"

namespace verisure {

using Json = nlohmann::ordered_json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

Result<int> positive_int(const Json& v, const std::string& key) {
    if (!v.is_number_integer())
        return make_error("BadConfig", key + " must be an integer", key);
    int64_t n = v.get<int64_t>();
    if (n <= 0) return make_error("BadConfig", key + " must be positive", key);
    return static_cast<int>(n);
}

} // namespace

GlobalConfig config_from_env() {
    GlobalConfig c;
    c.llm.base_url = env_or("VERISURE_LLM_BASE_URL", "");
    c.llm.api_key = env_or("VERISURE_LLM_API_KEY", "");
    c.llm.model = env_or("VERISURE_LLM_MODEL", c.llm.model);
    return c;
}

Result<GlobalConfig> apply_config_json(const Json& j, GlobalConfig base) {
    if (!j.is_object()) return make_error("BadConfig", "config root must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const Json& v = it.value();
        if (key == "d_max") {
            auto n = positive_int(v, key);
            if (!n.ok()) return n.error();
            base.d_max = n.value();
        } else if (key == "window_K") {
            auto n = positive_int(v, key);
            if (!n.ok()) return n.error();
            base.window_k = n.value();
        } else if (key == "max_iterations") {
            auto n = positive_int(v, key);
            if (!n.ok()) return n.error();
            base.max_iterations = n.value();
        } else if (key == "jobs") {
            auto n = positive_int(v, key);
            if (!n.ok()) return n.error();
            base.jobs = n.value();
        } else if (key == "formal") {
            if (!v.is_object()) return make_error("BadConfig", "formal must be an object", key);
            for (auto f = v.begin(); f != v.end(); ++f) {
                if (f.key() == "enabled") {
                    if (!f.value().is_boolean())
                        return make_error("BadConfig", "formal.enabled must be a boolean",
                                          "formal.enabled");
                    base.formal_enabled = f.value().get<bool>();
                } else {
                    return make_error("UnknownConfigKey",
                                      "unknown config key formal." + f.key(),
                                      "formal." + f.key());
                }
            }
        } else if (key == "sim") {
            if (!v.is_object()) return make_error("BadConfig", "sim must be an object", key);
            for (auto f = v.begin(); f != v.end(); ++f) {
                if (f.key() == "backend") {
                    if (!f.value().is_string())
                        return make_error("BadConfig", "sim.backend must be a string",
                                          "sim.backend");
                    std::string b = f.value().get<std::string>();
                    if (b != "external" && b != "scripted")
                        return make_error("BadConfig",
                                          "sim.backend must be external or scripted",
                                          "sim.backend");
                    base.sim_backend = b;
                } else if (f.key() == "fixture") {
                    if (!f.value().is_string())
                        return make_error("BadConfig", "sim.fixture must be a string",
                                          "sim.fixture");
                    base.sim_fixture = f.value().get<std::string>();
                } else {
                    return make_error("UnknownConfigKey", "unknown config key sim." + f.key(),
                                      "sim." + f.key());
                }
            }
        } else if (key == "llm") {
            if (!v.is_object()) return make_error("BadConfig", "llm must be an object", key);
            for (auto f = v.begin(); f != v.end(); ++f) {
                if (!f.value().is_string())
                    return make_error("BadConfig", "llm." + f.key() + " must be a string",
                                      "llm." + f.key());
                if (f.key() == "base_url")
                    base.llm.base_url = f.value().get<std::string>();
                else if (f.key() == "api_key")
                    base.llm.api_key = f.value().get<std::string>();
                else if (f.key() == "model")
                    base.llm.model = f.value().get<std::string>();
                else
                    return make_error("UnknownConfigKey", "unknown config key llm." + f.key(),
                                      "llm." + f.key());
            }
        } else {
            return make_error("UnknownConfigKey", "unknown config key " + key, key);
        }
    }
    return base;
}

Result<GlobalConfig> load_config(const std::string& path) {
    GlobalConfig base = config_from_env();
    if (path.empty()) return base;
    auto raw = read_file(path);
    if (!raw) return make_error("BadConfig", "cannot read config file", path);
    Json j = Json::parse(*raw, nullptr, false);
    if (j.is_discarded()) return make_error("BadConfig", "config file is not valid JSON", path);
    return apply_config_json(j, base);
}

Json config_to_json(const GlobalConfig& c) {
    Json j;
    j["d_max"] = c.d_max;
    j["window_K"] = c.window_k;
    j["max_iterations"] = c.max_iterations;
    j["formal"] = {{"enabled", c.formal_enabled}};
    j["sim"] = {{"backend", c.sim_backend}, {"fixture", c.sim_fixture}};
    j["llm"] = {{"base_url", c.llm.base_url},
                {"api_key", c.llm.api_key.empty() ? "" : "***"},
                {"model", c.llm.model}};
    j["jobs"] = c.jobs;
    return j;
}

} // namespace verisure
