// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/config.hpp"
#include "disputekit/corpus.hpp"
#include "disputekit/eval.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace disputekit {

/// Everything `synth` produces: network, rendered samples, linked rules and,
/// when the config has a labels section, the disputed orders.
struct Corpus {
    RoadNetwork network;
    std::vector<DatasetRecord> records;
    LinkedRuleBase rules;
    std::vector<OrderRecord> orders;
};

/// Writes network.json, dataset/, rules.json and, with labels, labels.json
/// and orders.jsonl under out_dir.
Corpus synthesize_corpus(const PipelineConfig& cfg, std::size_t n, const std::filesystem::path& out_dir);

struct VariantResult {
    std::string name;
    EvalReport report;
    std::size_t failures = 0;
    double mean_answer_reward = 0.0;
    double mean_total_reward = 0.0;
    std::size_t kept_for_training = 0;
};

struct BenchResult {
    nlohmann::json report; // what report.json holds
    std::vector<VariantResult> variants;
};

/// Builds the corpus, calibrates on the history orders, fills the precedent
/// store, adjudicates every evaluation order per variant and writes
/// report.json, audit.jsonl and the intermediate artifacts under out_dir.
/// Per-order failures are recorded, not thrown. Outputs depend only on the
/// configuration.
BenchResult run_benchmark(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

/// Backend for one role: "oracle" answers from `truth`, anything else goes
/// through make_backend with mock paths resolved against the config.
std::unique_ptr<ReasoningBackend> make_role_backend(const PipelineConfig& cfg, AgentRole role,
                                                    const std::map<std::string, std::string>& truth);

} // namespace disputekit
