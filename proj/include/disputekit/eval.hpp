// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/reward.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace disputekit {

struct ClassMetrics {
    std::optional<double> precision; // empty when nothing was predicted
    std::optional<double> recall;    // empty when there is no support
    std::size_t support = 0;
    std::size_t predicted = 0;
    std::size_t correct = 0;
};

struct EvalReport {
    std::vector<std::string> labels;
    /// Rows are ground truth, columns predictions; the extra last column
    /// counts missing or failed predictions.
    std::vector<std::vector<std::size_t>> confusion;
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t invalid = 0;
    double accuracy = 0.0;
    std::map<std::string, ClassMetrics> per_class;
    std::vector<std::pair<std::string, ClassMetrics>> groups; // in order of first label
};

nlohmann::json to_json(const EvalReport& r);

/// Fine-label accuracy plus per-class and per-group precision and recall.
/// An empty prediction means "no verdict" and counts as wrong. Throws
/// EvalError on length mismatch, empty input, a label outside the space or a
/// label missing from the grouping.
EvalReport evaluate(std::span<const std::string> preds, std::span<const std::string> gts,
                    const OrdinalLabelSpace& space, const std::map<std::string, std::string>& grouping);

} // namespace disputekit
