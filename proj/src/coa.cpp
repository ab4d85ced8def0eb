// SPDX-License-Identifier: Apache-2.0
#include "disputekit/coa.hpp"

#include "disputekit/error.hpp"
#include "disputekit/log.hpp"
#include "disputekit/text.hpp"

#include <exception>
#include <regex>

namespace disputekit {

MapQueries parse_map_queries(std::string_view t) {
    MapQueries out;
    for (const auto& span : text::find_tagged(t, "map", &out.malformed)) {
        out.queries.push_back(text::trim(span.body));
    }
    return out;
}

std::optional<std::string> parse_verdict_marker(std::string_view t) {
    const auto spans = text::find_tagged(t, "verdict");
    if (spans.empty()) {
        return std::nullopt;
    }
    return text::trim(spans.front().body);
}

std::size_t AdjudicationTranscript::adjudicator_turns() const {
    std::size_t n = 0;
    for (const auto& t : turns) {
        n += t.speaker == Speaker::adjudicator;
    }
    return n;
}

std::size_t AdjudicationTranscript::analyst_turns() const { return turns.size() - adjudicator_turns(); }

nlohmann::json to_json(const AdjudicationTranscript& t) {
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& turn : t.turns) {
        turns.push_back({{"speaker", turn.speaker == Speaker::adjudicator ? "adjudicator" : "analyst"},
                         {"text", turn.text}});
    }
    nlohmann::json queries = nlohmann::json::array();
    for (const auto& q : t.map_queries) {
        queries.push_back({{"turn", q.adjudicator_turn}, {"query", q.query}, {"answer", q.answer}});
    }
    return {{"turns", turns},
            {"map_queries", queries},
            {"raw_verdict", t.raw_verdict},
            {"verdict_marked", t.verdict_marked},
            {"forced", t.forced},
            {"failed", t.failed},
            {"failure", t.failure},
            {"backend_calls", t.backend_calls},
            {"malformed_tags", t.malformed_tags},
            {"dropped_queries", t.dropped_queries}};
}

void CoaOptions::validate() const {
    if (max_turns < 1) {
        throw ConfigError("coa.max_turns", "must be at least 1");
    }
    if (max_retries < 0) {
        throw ConfigError("coa.max_retries", "must be non-negative");
    }
    if (refine_reprompts < 0) {
        throw ConfigError("coa.refine_reprompts", "must be non-negative");
    }
}

namespace {

std::string rules_block(const RuleBase& rules) {
    if (rules.empty()) {
        return "No specific rules matched this order; rely on general adjudication practice.\n";
    }
    std::string out;
    for (const auto& r : rules.rules()) {
        out += "[" + r.id + "] " + r.clause + "\n";
    }
    return out;
}

std::string labels_line(const OrdinalLabelSpace& labels) {
    std::string out;
    for (const auto& l : labels.labels()) {
        out += out.empty() ? l : ", " + l;
    }
    return out;
}

// Backend call with bounded retries on retriable errors.
std::string call(ReasoningBackend& backend, const BackendRequest& req, int max_retries, std::size_t& calls) {
    for (int attempt = 0;; ++attempt) {
        ++calls;
        try {
            return backend.complete(req);
        } catch (const BackendError& ex) {
            if (!ex.retriable() || attempt >= max_retries) {
                throw;
            }
            log::event(log::Level::warn, "backend.retry",
                       {{"backend", backend.name()}, {"role", role_name(req.role)}, {"attempt", attempt + 1},
                        {"error", ex.what()}});
        }
    }
}

std::string redact(std::string s, const RuleBase& rules) {
    for (const auto& r : rules.rules()) {
        text::replace_all(s, r.clause, "[rule text withheld]");
    }
    return s;
}

std::string answer_body(const std::string& reply) {
    const auto spans = text::find_tagged(reply, "answer");
    return spans.empty() ? text::trim(reply) : text::trim(spans.front().body);
}

const char* const kNudge =
    "Please ask a map question inside <map></map> or give your final verdict inside <verdict></verdict>.";
const char* const kForce =
    "The inquiry limit has been reached. Give your final liability determination now inside "
    "<verdict></verdict>.";
const char* const kOneQuery = "\nOnly the first map question of each turn is answered; ask the others later.";

} // namespace

std::string render_adjudicator_context(const OrderRecord& order, const RuleBase& rules, const MetaInsight* insight,
                                       const OrdinalLabelSpace& labels, const CoaOptions& options) {
    std::string out = order_text(order);
    out += "\nAdjudication rules:\n" + rules_block(rules);
    if (options.include_insight && insight != nullptr) {
        out += "\nInsight from similar historical cases:\n" + insight->text + "\n";
    }
    out += "\nVerdict labels, from least to most severe: " + labels_line(labels) + "\n";
    if (options.reveal_ground_truth && order.ground_truth) {
        out += "Human-annotated result: " + *order.ground_truth + "\n";
    }
    return out;
}

AdjudicationTranscript run_adjudication_session(const OrderRecord& order, const RuleBase& rules,
                                                const MetaInsight* insight, const OrdinalLabelSpace& labels,
                                                ReasoningBackend& adjudicator, ReasoningBackend& analyst,
                                                const CoaOptions& options) {
    options.validate();
    AdjudicationTranscript t;
    BackendRequest adj;
    adj.role = AgentRole::adjudicator;
    adj.role_prompt = options.prompts.adjudicator;
    adj.messages.push_back({"user", render_adjudicator_context(order, rules, insight, labels, options)});

    BackendRequest ana;
    ana.role = AgentRole::analyst;
    ana.role_prompt = options.prompts.analyst;
    if (!order.image_ref.empty()) {
        ana.image_ref = order.image_ref;
    }

    auto hide_image = [&](std::string s) {
        text::replace_all(s, order.image_ref, "[trajectory image]");
        return s;
    };

    try {
        for (int turn = 1; turn <= options.max_turns; ++turn) {
            const std::string reply = call(adjudicator, adj, options.max_retries, t.backend_calls);
            adj.messages.push_back({"assistant", reply});
            t.turns.push_back({Speaker::adjudicator, reply});
            if (const auto v = parse_verdict_marker(reply)) {
                t.raw_verdict = *v;
                t.verdict_marked = true;
                return t;
            }
            const auto parsed = parse_map_queries(reply);
            t.malformed_tags += parsed.malformed;
            if (turn == options.max_turns) {
                t.dropped_queries += parsed.queries.size();
                break;
            }
            if (parsed.queries.empty()) {
                adj.messages.push_back({"user", kNudge});
                continue;
            }
            t.dropped_queries += parsed.queries.size() - 1;
            const std::string query = redact(parsed.queries.front(), rules);
            std::string question = "Question from the adjudication expert: " + query;
            if (ana.messages.empty() && ana.image_ref) {
                question = "Map image: " + *ana.image_ref + "\n" + question;
            }
            ana.messages.push_back({"user", question});
            const std::string raw_answer = call(analyst, ana, options.max_retries, t.backend_calls);
            ana.messages.push_back({"assistant", raw_answer});
            t.turns.push_back({Speaker::analyst, raw_answer});
            const std::string answer = hide_image(answer_body(raw_answer));
            t.map_queries.push_back({static_cast<std::size_t>(turn), query, answer});
            std::string follow = "<answer>" + answer + "</answer>";
            if (parsed.queries.size() > 1) {
                follow += kOneQuery;
            }
            adj.messages.push_back({"user", follow});
        }
        // Cap reached without a verdict.
        t.forced = true;
        adj.messages.push_back({"user", kForce});
        const std::string reply = call(adjudicator, adj, options.max_retries, t.backend_calls);
        t.turns.push_back({Speaker::adjudicator, reply});
        if (const auto v = parse_verdict_marker(reply)) {
            t.raw_verdict = *v;
            t.verdict_marked = true;
        } else {
            t.raw_verdict = text::trim(reply);
        }
    } catch (const std::exception& ex) {
        t.failed = true;
        t.failure = ex.what();
        log::event(log::Level::warn, "session.failed", {{"order", order.id}, {"error", ex.what()}});
    }
    return t;
}

nlohmann::json to_json(const RefinedReasoning& r) {
    return {{"reason",
             {{"information_analysis", r.reason[0]},
              {"visual_evidence", r.reason[1]},
              {"rule_grounding", r.reason[2]},
              {"comprehensive_adjudication", r.reason[3]}}},
            {"judge", r.judge},
            {"result", r.result},
            {"raw", r.raw}};
}

RefinedReasoning refined_from_json(const nlohmann::json& j) {
    RefinedReasoning r;
    const auto& reason = j.at("reason");
    r.reason = {reason.at("information_analysis").get<std::string>(), reason.at("visual_evidence").get<std::string>(),
                reason.at("rule_grounding").get<std::string>(),
                reason.at("comprehensive_adjudication").get<std::string>()};
    r.judge = j.at("judge").get<std::string>();
    r.result = j.at("result").get<std::string>();
    r.raw = j.value("raw", std::string{});
    return r;
}

namespace {

std::string only_block(std::string_view s, const char* tag) {
    const std::string open = std::string("<") + tag + ">";
    std::size_t unclosed = 0;
    const auto spans = text::find_tagged(s, tag, &unclosed);
    std::size_t opens = 0;
    for (auto p = s.find(open); p != std::string_view::npos; p = s.find(open, p + 1)) {
        ++opens;
    }
    if (spans.empty()) {
        throw RefineParseError(std::string("missing <") + tag + "> block");
    }
    if (spans.size() > 1 || opens > 1 || unclosed > 0) {
        throw RefineParseError(std::string("expected exactly one <") + tag + "> block");
    }
    std::string body = text::trim(spans.front().body);
    if (body.empty()) {
        throw RefineParseError(std::string("empty <") + tag + "> block");
    }
    return body;
}

const std::array<const char*, 4> kStages{"information analysis", "visual evidence integration", "rule grounding",
                                         "comprehensive adjudication"};

std::string clean_section(std::string s) {
    static const std::regex lead(R"(^[\s:\-\*#\)\.]+)");
    static const std::regex tail(R"((\s|\*|#)*(\(\d\)|\d\.)?(\s|\*|#)*$)");
    s = std::regex_replace(s, lead, "");
    s = std::regex_replace(s, tail, "");
    return text::trim(s);
}

} // namespace

RefinedReasoning parse_refined(std::string_view output, const OrdinalLabelSpace& labels) {
    RefinedReasoning r;
    r.raw = std::string(output);
    const std::string reason = only_block(output, "reason");
    r.judge = only_block(output, "judge");
    const std::string result = only_block(output, "result");
    if (format_reward(output) != 1) {
        throw RefineParseError("blocks must appear in the order <reason>, <judge>, <result>");
    }
    const std::string folded = text::casefold(reason);
    std::array<std::size_t, 4> at{};
    std::size_t from = 0;
    for (std::size_t i = 0; i < kStages.size(); ++i) {
        at[i] = folded.find(kStages[i], from);
        if (at[i] == std::string::npos) {
            throw RefineParseError(std::string("reasoning lacks the '") + kStages[i] + "' stage");
        }
        from = at[i] + std::string_view(kStages[i]).size();
    }
    for (std::size_t i = 0; i < kStages.size(); ++i) {
        const std::size_t begin = at[i] + std::string_view(kStages[i]).size();
        const std::size_t end = i + 1 < kStages.size() ? at[i + 1] : reason.size();
        r.reason[i] = clean_section(reason.substr(begin, end - begin));
        if (r.reason[i].empty()) {
            throw RefineParseError(std::string("the '") + kStages[i] + "' stage is empty");
        }
    }
    const auto canon = labels.parse(result);
    if (!canon) {
        throw LabelSpaceError("refined verdict '" + result + "' is not in the label space");
    }
    r.result = *canon;
    return r;
}

RefinedReasoning refine_transcript(const AdjudicationTranscript& transcript, const OrderRecord& order,
                                   const RuleBase& rules, const OrdinalLabelSpace& labels, ReasoningBackend& refiner,
                                   const CoaOptions& options) {
    options.validate();
    if (transcript.raw_verdict.empty()) {
        throw RefineParseError("transcript carries no raw verdict");
    }
    std::string ctx = order_text(order);
    ctx += "\nAdjudication rules:\n" + rules_block(rules);
    ctx += "\nVerdict labels, from least to most severe: " + labels_line(labels) + "\n";
    if (options.reveal_ground_truth && order.ground_truth) {
        ctx += "Ground truth: " + *order.ground_truth + "\n";
    }
    ctx += "\nConversation history:\n";
    for (const auto& turn : transcript.turns) {
        ctx += turn.speaker == Speaker::adjudicator ? "[Adjudicator] " : "[Visual Analyst] ";
        ctx += turn.text;
        ctx += "\n";
    }
    ctx += "\nRaw verdict: " + transcript.raw_verdict + "\n";

    BackendRequest req;
    req.role = AgentRole::refiner;
    req.role_prompt = options.prompts.refiner;
    req.messages.push_back({"user", ctx});
    std::size_t calls = 0;
    std::exception_ptr last;
    for (int attempt = 0; attempt <= options.refine_reprompts; ++attempt) {
        const std::string reply = call(refiner, req, options.max_retries, calls);
        try {
            return parse_refined(reply, labels);
        } catch (const Error& ex) {
            last = std::current_exception();
            req.messages.push_back({"assistant", reply});
            req.messages.push_back({"user", std::string("Your previous output could not be accepted: ") + ex.what() +
                                                ". Reply again in the required <reason>, <judge>, <result> format "
                                                "using one of the listed verdict labels."});
        }
    }
    std::rethrow_exception(last);
}

SelectionDecision select_training_sample(const RefinedReasoning& refined, const OrderRecord& order) {
    if (!order.ground_truth) {
        throw Error("order " + order.id + " has no ground truth");
    }
    if (text::casefold(text::trim(refined.result)) != text::casefold(text::trim(*order.ground_truth))) {
        return {false, "verdict diverges from ground truth"};
    }
    if (order.ambiguous) {
        return {false, "order is marked ambiguous"};
    }
    return {true, "verdict matches ground truth"};
}

nlohmann::json to_json(const AdjudicationResult& r) {
    nlohmann::json j{{"verdict", r.verdict},
                     {"in_space", r.in_space},
                     {"transcript", to_json(r.transcript)},
                     {"insight", to_json(r.insight)},
                     {"pruned_rules", r.pruned_rules},
                     {"precedents", r.precedents}};
    j["refined"] = r.refined ? to_json(*r.refined) : nlohmann::json(nullptr);
    return j;
}

AdjudicationResult adjudicate(const OrderRecord& order, const RuleBase& full_base, const CalibratorEnsemble* ensemble,
                              const PrecedentStore& store, const Embedder& embedder, const OrdinalLabelSpace& labels,
                              const Backends& backends, const AdjudicateOptions& options) {
    if (backends.adjudicator == nullptr || backends.analyst == nullptr ||
        (options.use_refinement && backends.refiner == nullptr) ||
        (options.coa.include_insight && backends.summarizer == nullptr)) {
        throw AdjudicationError("setup", "a required backend is missing");
    }
    if (options.use_calibration && ensemble == nullptr) {
        throw AdjudicationError("setup", "calibration is enabled but no ensemble was given");
    }
    std::string stage = "prune";
    AdjudicationResult res;
    try {
        const RuleBase rules = options.use_calibration ? prune_rules(*ensemble, full_base, order) : full_base;
        for (const auto& r : rules.rules()) {
            res.pruned_rules.push_back(r.id);
        }
        if (options.coa.include_insight) {
            stage = "retrieve";
            const auto neighbors = store.retrieve_topk(order_text(order), order.timestamp, options.top_k, embedder);
            stage = "summarize";
            res.insight = summarize_insight(neighbors, *backends.summarizer, options.coa.prompts.summarizer);
            res.precedents = res.insight.support;
        }
        stage = "session";
        res.transcript = run_adjudication_session(order, rules, options.coa.include_insight ? &res.insight : nullptr,
                                                  labels, *backends.adjudicator, *backends.analyst, options.coa);
        if (res.transcript.failed) {
            throw AdjudicationError(stage, res.transcript.failure);
        }
        if (options.use_refinement) {
            stage = "refine";
            res.refined = refine_transcript(res.transcript, order, rules, labels, *backends.refiner, options.coa);
            res.verdict = res.refined->result;
            res.in_space = true;
        } else {
            const auto canon = labels.parse(res.transcript.raw_verdict);
            res.verdict = canon ? *canon : res.transcript.raw_verdict;
            res.in_space = canon.has_value();
        }
    } catch (const AdjudicationError&) {
        throw;
    } catch (const std::exception& ex) {
        throw AdjudicationError(stage, ex.what());
    }
    return res;
}

} // namespace disputekit
