// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/backend.hpp"
#include "disputekit/calibration.hpp"
#include "disputekit/order.hpp"
#include "disputekit/prompts.hpp"
#include "disputekit/retrieval.hpp"
#include "disputekit/reward.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace disputekit {

struct MapQueries {
    std::vector<std::string> queries;
    std::size_t malformed = 0; // unclosed or nested openers
};

/// Well-formed <map>...</map> bodies in order of appearance.
MapQueries parse_map_queries(std::string_view text);

/// Body of the first well-formed <verdict> block, trimmed.
std::optional<std::string> parse_verdict_marker(std::string_view text);

enum class Speaker { adjudicator, analyst };

struct Turn {
    Speaker speaker = Speaker::adjudicator;
    std::string text;
};

struct MapExchange {
    std::size_t adjudicator_turn = 0; // 1-based
    std::string query;
    std::string answer;
};

struct AdjudicationTranscript {
    std::vector<Turn> turns;
    std::vector<MapExchange> map_queries;
    std::string raw_verdict;
    bool verdict_marked = false; // raw_verdict came from a <verdict> block
    bool forced = false;         // the turn cap was hit
    bool failed = false;
    std::string failure;
    std::size_t backend_calls = 0; // attempts, including retries
    std::size_t malformed_tags = 0;
    std::size_t dropped_queries = 0; // extra queries in one turn, not answered

    std::size_t adjudicator_turns() const;
    std::size_t analyst_turns() const;
};

nlohmann::json to_json(const AdjudicationTranscript& t);

struct CoaOptions {
    int max_turns = 8;
    int max_retries = 2;        // per backend call
    int refine_reprompts = 2;
    bool include_insight = true;
    bool reveal_ground_truth = false; // data synthesis: show y_gt to adjudicator and refiner
    Prompts prompts = default_prompts();

    void validate() const;
};

/// First user message of the adjudicator conversation: order text, the
/// pruned rules (or an explicit "no specific rules matched" block), the
/// insight and the label list. Never mentions the image.
std::string render_adjudicator_context(const OrderRecord& order, const RuleBase& rules, const MetaInsight* insight,
                                       const OrdinalLabelSpace& labels, const CoaOptions& options);

/// Inquiry loop. Each adjudicator turn either ends the session with a
/// <verdict> block or has its first <map> query answered by the analyst,
/// which sees only the image reference and the queries. At the turn cap a
/// final turn demands a verdict, so a session makes at most 2 * max_turns
/// successful backend calls. A backend error is retried up to
/// options.max_retries times before the session is marked failed.
AdjudicationTranscript run_adjudication_session(const OrderRecord& order, const RuleBase& rules,
                                                const MetaInsight* insight, const OrdinalLabelSpace& labels,
                                                ReasoningBackend& adjudicator, ReasoningBackend& analyst,
                                                const CoaOptions& options = {});

struct RefinedReasoning {
    // information analysis, visual evidence integration, rule grounding,
    // comprehensive adjudication
    std::array<std::string, 4> reason;
    std::string judge;
    std::string result;
    std::string raw;
};

nlohmann::json to_json(const RefinedReasoning& r);
RefinedReasoning refined_from_json(const nlohmann::json& j);

/// Parses refiner output. Throws RefineParseError on structural problems and
/// LabelSpaceError when <result> is not a label of `labels`.
RefinedReasoning parse_refined(std::string_view output, const OrdinalLabelSpace& labels);

RefinedReasoning refine_transcript(const AdjudicationTranscript& transcript, const OrderRecord& order,
                                   const RuleBase& rules, const OrdinalLabelSpace& labels, ReasoningBackend& refiner,
                                   const CoaOptions& options = {});

struct SelectionDecision {
    bool keep = false;
    std::string reason;
};

/// Keep iff the refined verdict equals the ground truth and the order is not
/// ambiguous. Throws Error when the order has no ground truth.
SelectionDecision select_training_sample(const RefinedReasoning& refined, const OrderRecord& order);

struct Backends {
    ReasoningBackend* adjudicator = nullptr;
    ReasoningBackend* analyst = nullptr;
    ReasoningBackend* refiner = nullptr;
    ReasoningBackend* summarizer = nullptr;
};

struct AdjudicateOptions {
    CoaOptions coa;
    std::size_t top_k = 4;
    bool use_calibration = true;
    bool use_refinement = true;
};

struct AdjudicationResult {
    std::string verdict; // canonical label, or the raw text when out of space
    bool in_space = false;
    std::optional<RefinedReasoning> refined;
    AdjudicationTranscript transcript;
    MetaInsight insight;
    std::vector<std::string> pruned_rules;
    std::vector<std::uint64_t> precedents;
};

nlohmann::json to_json(const AdjudicationResult& r);

/// prune -> retrieve -> summarize -> session -> refine. Errors are rethrown
/// as AdjudicationError naming the failing stage. `ensemble` may be null
/// when options.use_calibration is false.
AdjudicationResult adjudicate(const OrderRecord& order, const RuleBase& full_base, const CalibratorEnsemble* ensemble,
                              const PrecedentStore& store, const Embedder& embedder, const OrdinalLabelSpace& labels,
                              const Backends& backends, const AdjudicateOptions& options = {});

} // namespace disputekit
