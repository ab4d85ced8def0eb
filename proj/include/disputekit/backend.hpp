// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace disputekit {

enum class AgentRole { adjudicator, analyst, refiner, summarizer };

std::string role_name(AgentRole role);
AgentRole parse_role(std::string_view name);

struct Message {
    std::string role; // "user" or "assistant"
    std::string content;
};

struct BackendRequest {
    AgentRole role = AgentRole::adjudicator;
    std::string role_prompt;
    std::vector<Message> messages;
    std::optional<std::string> image_ref;
};

/// A chat-style text generator. Implementations must be safe to call from
/// several sessions at once.
class ReasoningBackend {
public:
    virtual ~ReasoningBackend() = default;
    virtual std::string complete(const BackendRequest& request) = 0;
    virtual std::string name() const = 0;
    virtual bool deterministic() const { return true; }
};

/// Hex FNV-1a digest of the role prompt and every message, used to key
/// scripted responses to exact prompts.
std::string request_fingerprint(const BackendRequest& request);

/// Replies from a JSON script. Each rule may constrain the role, a substring
/// of the last user message, the number of user messages so far ("turn") and
/// the exact request fingerprint; the first matching rule wins, otherwise
/// "default" is used. Responses may contain {{last}} (last user message) and
/// {{turn}}. Stateless, so replies depend only on the request.
class ScriptedBackend final : public ReasoningBackend {
public:
    struct Rule {
        std::optional<AgentRole> role;
        std::optional<std::string> contains;
        std::optional<std::size_t> turn;
        std::optional<std::string> fingerprint;
        std::string response;
    };

    ScriptedBackend(std::vector<Rule> rules, std::optional<std::string> fallback, std::string name = "scripted");
    static ScriptedBackend from_json(const nlohmann::json& script);
    static ScriptedBackend load(const std::string& path);

    std::string complete(const BackendRequest& request) override;
    std::string name() const override { return name_; }

private:
    std::vector<Rule> rules_;
    std::optional<std::string> fallback_;
    std::string name_;
};

/// Answers every role from a per-order label decision: the adjudicator states
/// the verdict at once, the refiner emits a well-formed four-stage log and the
/// analyst and summarizer return short neutral text. The order id is read from
/// the "Order <id>" line of the first user message.
class LabelPolicyBackend final : public ReasoningBackend {
public:
    using Policy = std::function<std::string(const std::string& order_id)>;

    LabelPolicyBackend(Policy policy, std::string name);
    static std::unique_ptr<LabelPolicyBackend> oracle(std::map<std::string, std::string> labels);
    static std::unique_ptr<LabelPolicyBackend> fixed(std::string label);

    std::string complete(const BackendRequest& request) override;
    std::string name() const override { return name_; }

private:
    Policy policy_;
    std::string name_;
};

/// Posts {"role", "role_prompt", "messages", "image_ref", "image"} as JSON to
/// a single endpoint and expects {"text": ...} back. The image is sent base64
/// encoded when image_ref names a readable file. A bearer token is read from
/// the environment variable named by `api_key_env` when it is set.
class HttpBackend final : public ReasoningBackend {
public:
    explicit HttpBackend(std::string url, std::string api_key_env = "DISPUTEKIT_API_KEY",
                         int timeout_seconds = 120);

    std::string complete(const BackendRequest& request) override;
    std::string name() const override { return "http:" + url_; }
    bool deterministic() const override { return false; }

private:
    std::string url_;
    std::string host_;
    std::string path_;
    std::string api_key_env_;
    int timeout_seconds_;
};

/// Forwards to another backend and records every request it sees.
class RecordingBackend final : public ReasoningBackend {
public:
    explicit RecordingBackend(ReasoningBackend& inner) : inner_(inner) {}

    std::string complete(const BackendRequest& request) override;
    std::string name() const override { return "recording(" + inner_.name() + ")"; }
    bool deterministic() const override { return inner_.deterministic(); }

    std::vector<BackendRequest> requests() const;
    std::size_t calls() const;

private:
    ReasoningBackend& inner_;
    mutable std::mutex mutex_;
    std::vector<BackendRequest> requests_;
};

/// Builds a backend from "mock:<script.json>", "oracle:<orders.jsonl>",
/// "fixed:<label>" or "http://host[:port]/path".
std::unique_ptr<ReasoningBackend> make_backend(std::string_view spec);

} // namespace disputekit
