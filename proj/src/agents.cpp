// SPDX-License-Identifier: Apache-2.0
#include "verisure/agents.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <regex>
#include <set>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "prompts_gen.hpp"

#include "verisure/util.hpp"

namespace verisure {

using Json = nlohmann::ordered_json;

std::string to_string(ChatRole r) {
    switch (r) {
    case ChatRole::System: return "system";
    case ChatRole::User: return "user";
    case ChatRole::Assistant: return "assistant";
    }
    return "user";
}

std::string to_string(RoleId r) {
    switch (r) {
    case RoleId::Architect: return "architect";
    case RoleId::Verifier: return "verifier";
    case RoleId::Coder: return "coder";
    case RoleId::Debugger: return "debugger";
    case RoleId::Asserter: return "asserter";
    case RoleId::Proofer: return "proofer";
    }
    return "architect";
}

std::optional<RoleId> parse_role(std::string_view s) {
    if (s == "architect") return RoleId::Architect;
    if (s == "verifier") return RoleId::Verifier;
    if (s == "coder") return RoleId::Coder;
    if (s == "debugger") return RoleId::Debugger;
    if (s == "asserter") return RoleId::Asserter;
    if (s == "proofer") return RoleId::Proofer;
    return std::nullopt;
}

namespace {

Result<std::string> template_for(RoleId role) {
    const auto& t = prompts::templates();
    auto it = t.find(to_string(role));
    if (it == t.end() || it->second.empty())
        return make_error("MissingTemplate", "no prompt template for role " + to_string(role));
    return it->second;
}

std::string fenced(const std::string& lang, const std::string& body) {
    std::string out = "```" + lang + "\n" + body;
    if (out.empty() || out.back() != '\n') out += "\n";
    return out + "```\n";
}

Error missing(const std::string& role, const std::string& field) {
    return make_error("MissingContext", role + " prompt requires " + field, field);
}

} // namespace

Result<std::vector<ChatMessage>> assemble_prompt(RoleId role, const AgentContext& ctx) {
    auto tmpl = template_for(role);
    if (!tmpl.ok()) return tmpl.error();

    std::ostringstream user;
    const std::string role_name = to_string(role);
    switch (role) {
    case RoleId::Architect:
        if (ctx.task_prompt.empty()) return missing(role_name, "task_prompt");
        user << "Design request:\n" << ctx.task_prompt << "\n";
        if (!ctx.testbench.empty())
            user << "\nProvided testbench (the design must pass it):\n"
                 << fenced("systemverilog", ctx.testbench);
        if (!ctx.lint_errors.empty())
            user << "\nLint report for your previous contract (fix every error):\n"
                 << ctx.lint_errors << "\n";
        break;
    case RoleId::Verifier:
    case RoleId::Coder:
        if (ctx.contract_json.empty()) return missing(role_name, "contract_json");
        user << "Design contract:\n" << fenced("json", ctx.contract_json);
        break;
    case RoleId::Debugger: {
        if (ctx.contract_json.empty()) return missing(role_name, "contract_json");
        if (ctx.trace_report.empty()) return missing(role_name, "trace_report");
        if (ctx.suspects.empty()) return missing(role_name, "suspects");
        user << "Design contract:\n" << fenced("json", ctx.contract_json);
        user << "\nTrace report:\n" << ctx.trace_report;
        if (!ctx.trace_report.empty() && ctx.trace_report.back() != '\n') user << "\n";
        if (!ctx.formal_hints.empty()) {
            user << "\nFormal hints:\n" << ctx.formal_hints;
            if (ctx.formal_hints.back() != '\n') user << "\n";
        }
        user << "\nEditable blocks (you may only replace listed blocks):\n";
        for (const SuspectBlockView& b : ctx.suspects) {
            user << "\nBLOCK " << b.id << " (" << b.kind << ") lines " << b.start_line << "-"
                 << b.end_line << ":\n"
                 << fenced("systemverilog", b.text);
        }
        break;
    }
    case RoleId::Asserter:
        if (ctx.contract_json.empty()) return missing(role_name, "contract_json");
        if (ctx.clocking_summary.empty()) return missing(role_name, "clocking_summary");
        user << "Design contract:\n" << fenced("json", ctx.contract_json);
        user << "\nClocking:\n" << ctx.clocking_summary << "\n";
        break;
    case RoleId::Proofer:
        if (ctx.functional_summary.empty()) return missing(role_name, "functional_summary");
        user << "Functional summary:\n" << ctx.functional_summary << "\n";
        break;
    }

    std::vector<ChatMessage> out;
    out.push_back({ChatRole::System, tmpl.value()});
    out.push_back({ChatRole::User, user.str()});
    return out;
}

namespace {

// First balanced {...} that parses as a JSON object; string-aware scan.
Result<std::string> first_json_object(const std::string& raw) {
    for (size_t i = raw.find('{'); i != std::string::npos; i = raw.find('{', i + 1)) {
        int depth = 0;
        bool in_str = false;
        bool esc = false;
        for (size_t j = i; j < raw.size(); ++j) {
            char ch = raw[j];
            if (in_str) {
                if (esc)
                    esc = false;
                else if (ch == '\\')
                    esc = true;
                else if (ch == '"')
                    in_str = false;
                continue;
            }
            if (ch == '"') {
                in_str = true;
            } else if (ch == '{') {
                ++depth;
            } else if (ch == '}') {
                if (--depth == 0) {
                    std::string candidate = raw.substr(i, j - i + 1);
                    Json parsed = Json::parse(candidate, nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) return candidate;
                    break;
                }
            }
        }
    }
    return make_error("MalformedResponse", "no JSON object found in response");
}

// Content between the first ``` line and its closing ``` line, trailing
// newline preserved.
Result<std::string> fenced_block_at(const std::string& raw, size_t from, size_t* after) {
    size_t open = raw.find("```", from);
    if (open == std::string::npos)
        return make_error("MalformedResponse", "no code fence found in response");
    size_t nl = raw.find('\n', open);
    if (nl == std::string::npos)
        return make_error("MalformedResponse", "unterminated code fence");
    size_t close = raw.find("\n```", nl);
    if (close == std::string::npos)
        return make_error("MalformedResponse", "unterminated code fence");
    if (after) {
        size_t end = raw.find('\n', close + 1);
        *after = end == std::string::npos ? raw.size() : end + 1;
    }
    return raw.substr(nl + 1, close - nl);
}

Result<Payload> extract_debugger(const std::string& raw, const std::vector<int>& editable_ids) {
    static const std::regex kBlockLine(R"(^\s*BLOCK\s+(\d+)\s*:?\s*$)");
    Payload payload;
    std::set<int> seen;
    size_t pos = 0;
    while (pos < raw.size()) {
        size_t eol = raw.find('\n', pos);
        std::string line = raw.substr(pos, eol == std::string::npos ? std::string::npos
                                                                    : eol - pos);
        size_t next = eol == std::string::npos ? raw.size() : eol + 1;
        std::smatch m;
        if (!std::regex_match(line, m, kBlockLine)) {
            pos = next;
            continue;
        }
        int id = std::atoi(m[1].str().c_str());
        if (!editable_ids.empty() &&
            std::find(editable_ids.begin(), editable_ids.end(), id) == editable_ids.end())
            return make_error("MalformedResponse",
                              "unknown block id " + std::to_string(id) +
                                  " (not in the editable list)");
        if (!seen.insert(id).second)
            return make_error("MalformedResponse",
                              "duplicate edit for block " + std::to_string(id));
        size_t after = next;
        auto body = fenced_block_at(raw, next, &after);
        if (!body.ok())
            return make_error("MalformedResponse",
                              "missing code fence after BLOCK " + std::to_string(id));
        payload.edits.push_back({id, body.take()});
        pos = after;
    }
    if (!payload.edits.empty()) return payload;
    for (const std::string& line : split_lines(raw)) {
        if (trim(line) == "unchanged") {
            payload.unchanged = true;
            return payload;
        }
    }
    return make_error("MalformedResponse",
                      "no edits found (expected BLOCK <id> + fenced replacement, or `unchanged`)");
}

} // namespace

Result<Payload> extract_payload(RoleId role, const std::string& raw,
                                const std::vector<int>& editable_ids) {
    Payload payload;
    switch (role) {
    case RoleId::Architect: {
        auto obj = first_json_object(raw);
        if (!obj.ok()) return obj.error();
        payload.text = obj.take();
        return payload;
    }
    case RoleId::Verifier:
    case RoleId::Coder:
    case RoleId::Asserter:
    case RoleId::Proofer: {
        auto block = fenced_block_at(raw, 0, nullptr);
        if (!block.ok()) return block.error();
        payload.text = block.take();
        return payload;
    }
    case RoleId::Debugger:
        return extract_debugger(raw, editable_ids);
    }
    return make_error("MalformedResponse", "unknown role");
}

Result<AgentTurn> run_agent_turn(ModelBackend& backend, RoleId role, const AgentContext& ctx,
                                 const ModelParams& params,
                                 const std::vector<int>& editable_ids, int max_retries) {
    auto prompt = assemble_prompt(role, ctx);
    if (!prompt.ok()) return prompt.error();
    std::vector<ChatMessage> msgs = prompt.take();

    AgentTurn turn;
    turn.role = role;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        ++turn.attempts;
        auto raw = backend.complete(msgs, params);
        if (!raw.ok()) return raw.error();
        turn.raw = raw.take();
        auto payload = extract_payload(role, turn.raw, editable_ids);
        if (payload.ok()) {
            turn.extracted = payload.take();
            turn.malformed = false;
            turn.malformed_reason.clear();
            turn.prompt = msgs;
            return turn;
        }
        turn.malformed = true;
        turn.malformed_reason = payload.error().message;
        msgs.push_back({ChatRole::Assistant, turn.raw.empty() ? "(empty)" : turn.raw});
        msgs.push_back({ChatRole::User, "Your previous response was malformed: " +
                                            payload.error().message +
                                            ". Respond again following the required format "
                                            "exactly."});
    }
    turn.prompt = msgs;
    return turn;
}

ScriptedModelBackend::ScriptedModelBackend(std::vector<std::string> responses)
    : responses_(std::move(responses)) {}

Result<std::string> ScriptedModelBackend::complete(const std::vector<ChatMessage>& messages,
                                                   const ModelParams&) {
    std::lock_guard<std::mutex> lock(mu_);
    prompts_.push_back(messages);
    if (next_ >= responses_.size())
        return make_error("Exhausted", "scripted fixtures exhausted after " +
                                           std::to_string(responses_.size()) + " responses");
    return responses_[next_++];
}

std::vector<std::vector<ChatMessage>> ScriptedModelBackend::prompts() const {
    std::lock_guard<std::mutex> lock(mu_);
    return prompts_;
}

size_t ScriptedModelBackend::remaining() const {
    std::lock_guard<std::mutex> lock(mu_);
    return responses_.size() - next_;
}

std::unique_ptr<ScriptedModelBackend> make_scripted_backend(std::vector<std::string> responses) {
    return std::make_unique<ScriptedModelBackend>(std::move(responses));
}

Result<std::vector<std::string>> load_scripted_responses(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    std::vector<std::string> files;
    for (auto it = fs::directory_iterator(dir, ec); it != fs::directory_iterator();
         it.increment(ec)) {
        if (ec) break;
        if (it->path().extension() == ".txt") files.push_back(it->path().string());
    }
    if (ec) return make_error("FixtureError", "cannot read fixture directory", dir);
    std::sort(files.begin(), files.end());
    if (files.empty()) return make_error("FixtureError", "no *.txt fixtures under " + dir, dir);
    std::vector<std::string> out;
    for (const std::string& f : files) {
        auto content = read_file(f);
        if (!content) return make_error("FixtureError", "cannot read fixture", f);
        out.push_back(*content);
    }
    return out;
}

namespace {

class HttpModelBackend : public ModelBackend {
public:
    HttpModelBackend(std::string base_url, std::string api_key, std::string model)
        : api_key_(std::move(api_key)), model_(std::move(model)) {
        std::string url = std::move(base_url);
        while (!url.empty() && url.back() == '/') url.pop_back();
        size_t scheme = url.find("://");
        size_t slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        host_ = slash == std::string::npos ? url : url.substr(0, slash);
        prefix_ = slash == std::string::npos ? "" : url.substr(slash);
        if (prefix_.empty()) prefix_ = "/v1";
    }

    Result<std::string> complete(const std::vector<ChatMessage>& messages,
                                 const ModelParams& params) override {
        Json req;
        req["model"] = model_;
        req["messages"] = Json::array();
        for (const ChatMessage& m : messages)
            req["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
        req["temperature"] = params.temperature;
        req["max_tokens"] = params.max_tokens;

        httplib::Client cli(host_);
        cli.set_connection_timeout(30);
        cli.set_read_timeout(300);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
        auto res = cli.Post(prefix_ + "/chat/completions", headers, req.dump(),
                            "application/json");
        if (!res) return make_error("HttpError", "no response from " + host_);
        if (res->status != 200)
            return make_error("HttpError",
                              "status " + std::to_string(res->status) + ": " + res->body);
        Json body = Json::parse(res->body, nullptr, false);
        if (body.is_discarded() || !body.contains("choices") || body["choices"].empty() ||
            !body["choices"][0].contains("message") ||
            !body["choices"][0]["message"].contains("content"))
            return make_error("HttpError", "malformed completion response");
        return body["choices"][0]["message"]["content"].get<std::string>();
    }

    std::string name() const override { return "http:" + model_; }

private:
    std::string host_;
    std::string prefix_;
    std::string api_key_;
    std::string model_;
};

} // namespace

std::unique_ptr<ModelBackend> make_http_backend(const std::string& base_url,
                                                const std::string& api_key,
                                                const std::string& model) {
    return std::make_unique<HttpModelBackend>(base_url, api_key, model);
}

Result<std::unique_ptr<ModelBackend>> make_http_backend_from_env() {
    const char* base = std::getenv("VERISURE_LLM_BASE_URL");
    if (!base || !*base)
        return make_error("NoBackend", "VERISURE_LLM_BASE_URL is not set");
    const char* key = std::getenv("VERISURE_LLM_API_KEY");
    const char* model = std::getenv("VERISURE_LLM_MODEL");
    return std::unique_ptr<ModelBackend>(make_http_backend(
        base, key ? key : "", model && *model ? model : "default"));
}

} // namespace verisure
