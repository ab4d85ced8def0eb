// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/classifier.hpp"
#include "disputekit/embedder.hpp"
#include "disputekit/order.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace disputekit {

struct Rule {
    std::string id;
    std::string clause;
};

/// Ordered rule base; ids are unique and clauses non-empty.
class RuleBase {
public:
    RuleBase() = default;
    explicit RuleBase(std::vector<Rule> rules);

    const std::vector<Rule>& rules() const { return rules_; }
    std::size_t size() const { return rules_.size(); }
    bool empty() const { return rules_.empty(); }
    const Rule* find(std::string_view id) const;

private:
    std::vector<Rule> rules_;
};

/// Accepts {"rules": [{"id", "clause"}]} or a bare array of the same objects.
RuleBase rule_base_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RuleBase& base);
RuleBase read_rule_base(const std::string& path);

struct FeatureVector {
    std::vector<double> tabular;
    std::vector<double> semantic;

    std::vector<double> concat() const;
};

/// Tabular schema and min-max statistics fitted on a training corpus.
class FeatureSpace {
public:
    FeatureSpace() = default;
    static FeatureSpace fit(std::span<const OrderRecord> corpus);

    /// Unscaled tabular values in schema order. Absent statistics read as 0.
    std::vector<double> raw_tabular(const OrderRecord& order) const;
    FeatureVector build(const OrderRecord& order, const Embedder& embedder) const;

    const std::vector<std::string>& names() const { return names_; }
    nlohmann::json to_json() const;
    static FeatureSpace from_json(const nlohmann::json& j);

private:
    std::vector<std::string> names_;
    std::vector<double> min_;
    std::vector<double> max_;
};

/// Validation metrics of one family on one rule.
struct FamilyScore {
    Family family = Family::logistic;
    double recall = 0.0;
    double precision = 0.0;
};

/// Highest recall wins; ties go to higher precision, then to the earlier
/// entry. Throws CalibrationError on an empty list.
std::size_t select_family(std::span<const FamilyScore> candidates);

struct RuleCalibrator {
    std::string rule_id;
    Family family = Family::constant;
    double threshold = 0.5;
    double val_recall = 0.0;
    double val_precision = 0.0;
    bool fail_open = false;
    std::size_t positives = 0; // after down-sampling
    std::size_t negatives = 0;
    std::vector<FamilyScore> candidates;
    std::shared_ptr<const BinaryClassifier> model;

    bool predict(const std::vector<double>& x) const { return model->score(x) >= threshold; }
};

struct CalibrationOptions {
    std::vector<Family> families{Family::logistic, Family::stumps, Family::knn};
    double val_split = 0.2;
    double max_ratio = 2.0; // majority:minority cap after down-sampling
    double threshold = 0.5;
    std::uint64_t seed = 0;
    unsigned workers = 0;

    void validate() const;
};

/// One trained classifier per rule plus the feature space it was fitted on.
/// Immutable after construction; safe to query concurrently.
class CalibratorEnsemble {
public:
    CalibratorEnsemble(FeatureSpace features, std::shared_ptr<const Embedder> embedder,
                       std::vector<RuleCalibrator> rules, CalibrationOptions options);

    const FeatureSpace& features() const { return features_; }
    const Embedder& embedder() const { return *embedder_; }
    const std::vector<RuleCalibrator>& rules() const { return rules_; }
    const RuleCalibrator* find(std::string_view rule_id) const;
    const CalibrationOptions& options() const { return options_; }

    FeatureVector build_features(const OrderRecord& order) const;
    /// Rule ids predicted applicable, in ensemble order.
    std::vector<std::string> predict(const OrderRecord& order) const;

    nlohmann::json to_json() const;
    static CalibratorEnsemble from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static CalibratorEnsemble load(const std::string& path);

private:
    FeatureSpace features_;
    std::shared_ptr<const Embedder> embedder_;
    std::vector<RuleCalibrator> rules_;
    CalibrationOptions options_;
};

FeatureVector build_features(const OrderRecord& order, const FeatureSpace& space, const Embedder& embedder);

/// Trains one calibrator per rule in `base`. Each order's `applicable_rules`
/// is its positive set. A rule with fewer than two positives or negatives in
/// the training split fails open: it always predicts applicable.
CalibratorEnsemble train_calibrators(std::span<const OrderRecord> dataset, const RuleBase& base,
                                     std::shared_ptr<const Embedder> embedder, const CalibrationOptions& options);

/// Rules of `base` the ensemble predicts applicable, in base order.
RuleBase prune_rules(const CalibratorEnsemble& ensemble, const RuleBase& base, const OrderRecord& order);

} // namespace disputekit
