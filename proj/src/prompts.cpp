// SPDX-License-Identifier: Apache-2.0
#include "disputekit/prompts.hpp"

#include "disputekit/error.hpp"

#include <fstream>
#include <iterator>

namespace disputekit {

namespace {

const char* const kAdjudicator =
    "You are a ride-hailing marketplace adjudication expert responsible for determining which liability features "
    "and final liability a driver's behavior matches in a cancelled order based on the information provided after "
    "the driver accepts the request. Please provide the reasoning process and final result according to the "
    "adjudication rules and order information below. During the adjudication process, if you believe map-related "
    "information is necessary, you may use <map>map-related question</map> to ask. Please note that your final "
    "liability determination must be consistent with the human-annotated result.\n"
    "When you reach your final liability determination, state it as one of the listed verdict labels inside "
    "<verdict></verdict> tags.";

const char* const kAnalyst =
    "You are a Map Expert responsible for liability adjudication in the ride-hailing marketplace. Your task is to "
    "analyze orders cancelled by drivers after acceptance and answer questions from an Adjudication Expert to "
    "determine which specific fault indicators the driver's behavior matches and the final liability. We will "
    "provide the order details, the map, and the expert's questions. Please carefully analyze the order "
    "information in the context of the map and return your answer within <answer></answer> tags.";

const char* const kRefiner =
    "You are a Reasoning Refinement Specialist in the ride-hailing adjudication domain. Your task is to act as a "
    "meta-cognitive editor to distill the raw, fragmented interaction history between an Adjudicator and a Visual "
    "Analyst into a coherent, standardized adjudication log.\n"
    "\n"
    "Based on the provided conversation history, order metadata, and adjudication rules, please reconstruct the "
    "reasoning process and output the final conclusions following this strict format:\n"
    "\n"
    "1. Reasoning Chain: Enclose your detailed reconstruction of the adjudication path within <reason>...</reason> "
    "tags. Inside this tag, you must structure the content into four distinct stages:\n"
    "    (1) Information Analysis: Systematically summarize the key order metadata and dispute context.\n"
    "    (2) Visual Evidence Integration: Synthesize the objective trajectory facts verified by the Visual "
    "Analyst.\n"
    "    (3) Rule Grounding: Explicitly map the established facts to the specific liability clauses.\n"
    "    (4) Comprehensive Adjudication: Perform the final logical deduction.\n"
    "\n"
    "2. Scenario Identification: Output the specific adjudication scenario or fault category within "
    "<judge>...</judge> tags.\n"
    "\n"
    "3. Final Verdict: Output the final liability determination within <result>...</result> tags.\n"
    "\n"
    "Please ensure that the refined reasoning path is logically fluid and that the final determination aligns "
    "strictly with the provided ground truth.";

const char* const kSummarizer =
    "You review historical adjudication precedents for a ride-hailing dispute desk. Summarize what the listed "
    "precedents have in common and how they were decided, in a few sentences a human adjudicator can act on. "
    "Do not decide the current case.";

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("coa.prompts", "cannot open prompt file " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

const Prompts& default_prompts() {
    static const Prompts p{kAdjudicator, kAnalyst, kRefiner, kSummarizer};
    return p;
}

Prompts load_prompts(const std::string& adjudicator_path, const std::string& analyst_path,
                     const std::string& refiner_path, const std::string& summarizer_path) {
    Prompts p = default_prompts();
    if (!adjudicator_path.empty()) {
        p.adjudicator = slurp(adjudicator_path);
    }
    if (!analyst_path.empty()) {
        p.analyst = slurp(analyst_path);
    }
    if (!refiner_path.empty()) {
        p.refiner = slurp(refiner_path);
    }
    if (!summarizer_path.empty()) {
        p.summarizer = slurp(summarizer_path);
    }
    return p;
}

} // namespace disputekit
