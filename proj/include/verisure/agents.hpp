// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "verisure/common.hpp"
#include "verisure/patch.hpp"

namespace verisure {

enum class ChatRole { System, User, Assistant };
enum class RoleId { Architect, Verifier, Coder, Debugger, Asserter, Proofer };

std::string to_string(ChatRole r);
std::string to_string(RoleId r);
std::optional<RoleId> parse_role(std::string_view s);

struct ChatMessage {
    ChatRole role = ChatRole::User;
    std::string content; // nonempty

    bool operator==(const ChatMessage&) const = default;
};

struct ModelParams {
    double temperature = 0.0;
    int max_tokens = 4096;
};

/// Chat-model abstraction. The only network activity in the library lives
/// behind this interface; implementations must be shareable across sessions.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual Result<std::string> complete(const std::vector<ChatMessage>& messages,
                                         const ModelParams& params) = 0;
    virtual std::string name() const = 0;
};

struct SuspectBlockView {
    int id = 0;
    std::string kind;
    int start_line = 0;
    int end_line = 0;
    std::string text;
};

/// Role-appropriate inputs for prompt assembly. Unused fields are ignored by
/// roles that do not read them; missing required fields are MissingContext.
struct AgentContext {
    std::string task_prompt;        // architect
    std::string testbench;          // architect, optional golden testbench
    std::string lint_errors;        // architect, optional prior-turn report
    std::string contract_json;      // verifier, coder, debugger, asserter
    std::string trace_report;       // debugger, embedded verbatim
    std::string formal_hints;       // debugger, optional
    std::vector<SuspectBlockView> suspects; // debugger, the editable surface
    std::string clocking_summary;   // asserter
    std::string functional_summary; // proofer
};

/// Deterministic prompt assembly: system text from the repo-owned template,
/// user text rendered from the context. The debugger prompt embeds the trace
/// report verbatim and enumerates the editable block ids with the locality
/// rule stated. Errors: MissingContext, MissingTemplate.
Result<std::vector<ChatMessage>> assemble_prompt(RoleId role, const AgentContext& ctx);

/// Structured payload extracted from an assistant response. `text` holds the
/// contract JSON, code, or assertion body; `edits` is debugger-only;
/// `unchanged` marks an explicit no-edit debugger reply.
struct Payload {
    std::string text;
    std::vector<PatchOp> edits;
    bool unchanged = false;
};

/// Total on arbitrary text: every failure is MalformedResponse with a reason.
/// Architect takes the first JSON object; coder/verifier/asserter/proofer the
/// first fenced code block; debugger a list of `BLOCK <id>` + fenced
/// replacement pairs (or the word `unchanged`). When `editable_ids` is
/// nonempty, debugger edits naming other blocks are MalformedResponse.
Result<Payload> extract_payload(RoleId role, const std::string& raw,
                                const std::vector<int>& editable_ids = {});

struct AgentTurn {
    RoleId role = RoleId::Architect;
    std::vector<ChatMessage> prompt; // final prompt, retry feedback included
    std::string raw;                 // last assistant text
    Payload extracted;
    bool malformed = false; // retries exhausted without a parseable response
    std::string malformed_reason;
    int attempts = 0;
};

/// One full agent turn: assemble, complete, extract, with malformed responses
/// fed back as retry turns up to `max_retries` extra completions. Backend
/// failures (Exhausted, HTTP errors) surface as errors; exhausted retries
/// return ok with `malformed` set.
Result<AgentTurn> run_agent_turn(ModelBackend& backend, RoleId role, const AgentContext& ctx,
                                 const ModelParams& params = {},
                                 const std::vector<int>& editable_ids = {},
                                 int max_retries = 2);

/// Deterministic mock: returns fixtures in order, then errors Exhausted, and
/// records every prompt it was asked to complete.
class ScriptedModelBackend : public ModelBackend {
public:
    explicit ScriptedModelBackend(std::vector<std::string> responses);

    Result<std::string> complete(const std::vector<ChatMessage>& messages,
                                 const ModelParams& params) override;
    std::string name() const override { return "scripted"; }

    std::vector<std::vector<ChatMessage>> prompts() const;
    size_t remaining() const;

private:
    mutable std::mutex mu_;
    std::vector<std::string> responses_;
    std::vector<std::vector<ChatMessage>> prompts_;
    size_t next_ = 0;
};

std::unique_ptr<ScriptedModelBackend> make_scripted_backend(std::vector<std::string> responses);

/// Loads ordered fixture responses: every *.txt under dir, sorted by name.
Result<std::vector<std::string>> load_scripted_responses(const std::string& dir);

/// Chat-completions HTTP backend configured from the environment:
/// VERISURE_LLM_BASE_URL (required), VERISURE_LLM_API_KEY, VERISURE_LLM_MODEL.
/// Errors: NoBackend when the base URL is unset.
Result<std::unique_ptr<ModelBackend>> make_http_backend_from_env();

/// Explicit-configuration variant used by tests against a local server.
std::unique_ptr<ModelBackend> make_http_backend(const std::string& base_url,
                                                const std::string& api_key,
                                                const std::string& model);

} // namespace verisure
