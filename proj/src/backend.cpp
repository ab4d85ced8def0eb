// SPDX-License-Identifier: Apache-2.0
#include "disputekit/backend.hpp"

#include "disputekit/error.hpp"
#include "disputekit/order.hpp"
#include "disputekit/rng.hpp"
#include "disputekit/text.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>

namespace disputekit {

std::string role_name(AgentRole role) {
    switch (role) {
    case AgentRole::adjudicator: return "adjudicator";
    case AgentRole::analyst: return "analyst";
    case AgentRole::refiner: return "refiner";
    case AgentRole::summarizer: return "summarizer";
    }
    return "unknown";
}

AgentRole parse_role(std::string_view name) {
    for (AgentRole r : {AgentRole::adjudicator, AgentRole::analyst, AgentRole::refiner, AgentRole::summarizer}) {
        if (role_name(r) == name) {
            return r;
        }
    }
    throw BackendError("unknown agent role '" + std::string(name) + "'", false);
}

std::string request_fingerprint(const BackendRequest& request) {
    std::string buf = role_name(request.role);
    buf += '\x1f';
    buf += request.role_prompt;
    for (const auto& m : request.messages) {
        buf += '\x1e';
        buf += m.role;
        buf += '\x1f';
        buf += m.content;
    }
    return text::format("%016llx", static_cast<unsigned long long>(fnv1a64(buf)));
}

namespace {

std::size_t user_turns(const BackendRequest& r) {
    std::size_t n = 0;
    for (const auto& m : r.messages) {
        n += m.role == "user";
    }
    return n;
}

std::string last_user(const BackendRequest& r) {
    for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it) {
        if (it->role == "user") {
            return it->content;
        }
    }
    return {};
}

std::string first_user(const BackendRequest& r) {
    for (const auto& m : r.messages) {
        if (m.role == "user") {
            return m.content;
        }
    }
    return {};
}

std::string render(std::string response, std::size_t turn, const std::string& last) {
    text::replace_all(response, "{{turn}}", std::to_string(turn));
    text::replace_all(response, "{{last}}", last);
    return response;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

ScriptedBackend::ScriptedBackend(std::vector<Rule> rules, std::optional<std::string> fallback, std::string name)
    : rules_(std::move(rules)), fallback_(std::move(fallback)), name_(std::move(name)) {}

ScriptedBackend ScriptedBackend::from_json(const nlohmann::json& script) {
    try {
        std::vector<Rule> rules;
        for (const auto& r : script.value("rules", nlohmann::json::array())) {
            Rule rule;
            if (r.contains("role")) {
                rule.role = parse_role(r["role"].get<std::string>());
            }
            if (r.contains("contains")) {
                rule.contains = r["contains"].get<std::string>();
            }
            if (r.contains("turn")) {
                rule.turn = r["turn"].get<std::size_t>();
            }
            if (r.contains("fingerprint")) {
                rule.fingerprint = r["fingerprint"].get<std::string>();
            }
            rule.response = r.at("response").get<std::string>();
            rules.push_back(std::move(rule));
        }
        std::optional<std::string> fallback;
        if (script.contains("default")) {
            fallback = script["default"].get<std::string>();
        }
        return ScriptedBackend(std::move(rules), std::move(fallback), script.value("name", std::string("scripted")));
    } catch (const nlohmann::json::exception& ex) {
        throw BackendError(std::string("malformed backend script: ") + ex.what(), false);
    }
}

ScriptedBackend ScriptedBackend::load(const std::string& path) {
    try {
        return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& ex) {
        throw BackendError(path + ": " + ex.what(), false);
    }
}

std::string ScriptedBackend::complete(const BackendRequest& request) {
    const std::string last = last_user(request);
    const std::size_t turn = user_turns(request);
    std::optional<std::string> fp;
    for (const auto& rule : rules_) {
        if (rule.role && *rule.role != request.role) {
            continue;
        }
        if (rule.contains && last.find(*rule.contains) == std::string::npos) {
            continue;
        }
        if (rule.turn && *rule.turn != turn) {
            continue;
        }
        if (rule.fingerprint) {
            if (!fp) {
                fp = request_fingerprint(request);
            }
            if (*rule.fingerprint != *fp) {
                continue;
            }
        }
        return render(rule.response, turn, last);
    }
    if (!fallback_) {
        throw BackendError("scripted backend has no response for this " + role_name(request.role) + " request",
                           false);
    }
    return render(*fallback_, turn, last);
}

LabelPolicyBackend::LabelPolicyBackend(Policy policy, std::string name)
    : policy_(std::move(policy)), name_(std::move(name)) {}

std::unique_ptr<LabelPolicyBackend> LabelPolicyBackend::oracle(std::map<std::string, std::string> labels) {
    auto shared = std::make_shared<const std::map<std::string, std::string>>(std::move(labels));
    return std::make_unique<LabelPolicyBackend>(
        [shared](const std::string& id) {
            const auto it = shared->find(id);
            if (it == shared->end()) {
                throw BackendError("oracle has no label for order " + id, false);
            }
            return it->second;
        },
        "oracle");
}

std::unique_ptr<LabelPolicyBackend> LabelPolicyBackend::fixed(std::string label) {
    return std::make_unique<LabelPolicyBackend>([label](const std::string&) { return label; }, "fixed:" + label);
}

std::string LabelPolicyBackend::complete(const BackendRequest& request) {
    switch (request.role) {
    case AgentRole::analyst:
        return "<answer>The trajectory in the image is consistent with the question as asked.</answer>";
    case AgentRole::summarizer:
        return "Retrieved precedents were reviewed; decide from the current order's own evidence.";
    case AgentRole::adjudicator:
    case AgentRole::refiner:
        break;
    }
    static const std::regex order_line(R"((?:^|\n)Order ([^\s:]+)\n)");
    std::smatch m;
    const std::string first = first_user(request);
    if (!std::regex_search(first, m, order_line)) {
        throw BackendError("request carries no order id", false);
    }
    const std::string label = policy_(m[1].str());
    if (request.role == AgentRole::adjudicator) {
        return "The order evidence supports a final determination. <verdict>" + label + "</verdict>";
    }
    return "<reason>Information Analysis: order " + m[1].str() +
           " was reviewed with its metadata and dispute context.\n"
           "Visual Evidence Integration: the analyst findings were taken as the trajectory facts.\n"
           "Rule Grounding: the facts were matched against the supplied liability clauses.\n"
           "Comprehensive Adjudication: the evidence supports " +
           label + ".</reason>\n<judge>" + label + "</judge>\n<result>" + label + "</result>";
}

HttpBackend::HttpBackend(std::string url, std::string api_key_env, int timeout_seconds)
    : url_(std::move(url)), api_key_env_(std::move(api_key_env)), timeout_seconds_(timeout_seconds) {
    static const std::regex re(R"(^(http://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url_, m, re)) {
        throw ConfigError("backend", "http backend url must look like http://host[:port]/path, got " + url_);
    }
    host_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
}

std::string HttpBackend::complete(const BackendRequest& request) {
    nlohmann::json body{{"role", role_name(request.role)}, {"role_prompt", request.role_prompt}};
    body["messages"] = nlohmann::json::array();
    for (const auto& m : request.messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    body["image_ref"] = nullptr;
    body["image"] = nullptr;
    if (request.image_ref) {
        body["image_ref"] = *request.image_ref;
        std::ifstream probe(*request.image_ref, std::ios::binary);
        if (probe) {
            body["image"] = httplib::detail::base64_encode(read_file(*request.image_ref));
        }
    }
    httplib::Client client(host_);
    client.set_connection_timeout(timeout_seconds_);
    client.set_read_timeout(timeout_seconds_);
    httplib::Headers headers;
    if (const char* key = std::getenv(api_key_env_.c_str()); key != nullptr && *key != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
        throw BackendError("http backend " + url_ + ": " + httplib::to_string(res.error()), true);
    }
    if (res->status >= 500 || res->status == 429) {
        throw BackendError(text::format("http backend %s: status %d", url_.c_str(), res->status), true);
    }
    if (res->status != 200) {
        throw BackendError(text::format("http backend %s: status %d", url_.c_str(), res->status), false);
    }
    try {
        return nlohmann::json::parse(res->body).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
        throw BackendError(std::string("http backend returned malformed body: ") + ex.what(), false);
    }
}

std::string RecordingBackend::complete(const BackendRequest& request) {
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(request);
    }
    return inner_.complete(request);
}

std::vector<BackendRequest> RecordingBackend::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

std::size_t RecordingBackend::calls() const {
    std::lock_guard lock(mutex_);
    return requests_.size();
}

std::unique_ptr<ReasoningBackend> make_backend(std::string_view spec) {
    const auto colon = spec.find(':');
    const std::string kind(spec.substr(0, colon));
    const std::string arg = colon == std::string_view::npos ? std::string{} : std::string(spec.substr(colon + 1));
    if (kind == "mock" && !arg.empty()) {
        return std::make_unique<ScriptedBackend>(ScriptedBackend::load(arg));
    }
    if (kind == "fixed" && !arg.empty()) {
        return LabelPolicyBackend::fixed(arg);
    }
    if (kind == "oracle" && !arg.empty()) {
        std::map<std::string, std::string> labels;
        for (const auto& o : read_orders_jsonl(arg)) {
            if (o.ground_truth) {
                labels[o.id] = *o.ground_truth;
            }
        }
        return LabelPolicyBackend::oracle(std::move(labels));
    }
    if (kind == "http") {
        return std::make_unique<HttpBackend>(std::string(spec));
    }
    throw ConfigError("backend", "unrecognized backend spec '" + std::string(spec) + "'");
}

} // namespace disputekit
