// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/calibration.hpp"
#include "disputekit/coa.hpp"
#include "disputekit/dataset.hpp"
#include "disputekit/mutation.hpp"
#include "disputekit/render.hpp"
#include "disputekit/reward.hpp"
#include "disputekit/road_network.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace disputekit {

struct DatasetConfig {
    std::size_t count = 200;
    ClassMix class_mix{{TrajectoryLabel::compliant, 0.2},
                       {TrajectoryLabel::drift_only, 0.2},
                       {TrajectoryLabel::unintentional_deviation, 0.2},
                       {TrajectoryLabel::reverse_driving, 0.2},
                       {TrajectoryLabel::arrival_then_leave, 0.2}};
    double min_poi_distance = 500.0;
    int max_attempts = 50;
};

struct RetrievalConfig {
    std::size_t k = 4;
    std::string embedder = "hashing-256";
};

struct CoaConfig {
    int max_turns = 8;
    int max_retries = 2;
    int refine_reprompts = 2;
    bool include_insight = true;
    bool reveal_ground_truth = false;
    /// Backend spec used for every role without an override: "oracle",
    /// "fixed:<label>", "mock:<script>" or an http:// URL.
    std::string backend = "oracle";
    std::map<AgentRole, std::string> role_backends;
    std::map<AgentRole, std::string> prompt_paths;
};

/// Verdict labels and how they relate to the synthetic classes.
struct LabelConfig {
    std::vector<std::string> labels;                      // least to most severe
    std::map<std::string, std::string> grouping;          // label -> group (e.g. Normal, Malicious)
    std::map<std::string, std::string> class_verdicts;    // trajectory class -> label
    bool present = false;
};

struct BenchConfig {
    std::size_t history = 100; // orders feeding calibration and the precedent store
    std::size_t eval = 100;
    std::vector<std::string> ablations; // no_refinement, no_insight, no_calibration, binary_reward
    std::string rules;                  // rule base path; empty = built-in
    double ambiguous_share = 0.0;       // share of orders flagged ambiguous
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::string log_level = "warn";
    NetworkParams network;
    MutationConfig mutation;
    RenderSpec render;
    DatasetConfig dataset;
    CalibrationOptions calibration;
    RetrievalConfig retrieval;
    CoaConfig coa;
    RewardConfig reward;
    LabelConfig labels;
    BenchConfig bench;
    std::filesystem::path base_dir; // relative paths resolve against this

    /// Seed for a named component, derived from the root seed.
    std::uint64_t seed_for(std::string_view component) const;
    std::string resolve(const std::string& path) const;
    OrdinalLabelSpace label_space() const;
    CoaOptions coa_options() const;
    void validate() const;
};

/// Parses and validates; unknown keys are rejected with their full path.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::string& path);

/// Effective configuration with every default filled in and the derived
/// component seeds listed.
nlohmann::json to_json(const PipelineConfig& cfg);

} // namespace disputekit
