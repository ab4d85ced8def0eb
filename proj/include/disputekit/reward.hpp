// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace disputekit {

/// Ordered verdict labels y_1 < ... < y_K with ranks 1..K.
class OrdinalLabelSpace {
public:
    explicit OrdinalLabelSpace(std::vector<std::string> labels);

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    /// Canonical label for `text` after trimming and ASCII case folding.
    std::optional<std::string> parse(std::string_view text) const;
    bool contains(std::string_view text) const { return parse(text).has_value(); }
    /// 1-based rank; throws LabelSpaceError when absent.
    std::size_t rank(std::string_view label) const;

    nlohmann::json to_json() const;
    /// Accepts {"labels": [...]} or a bare array.
    static OrdinalLabelSpace from_json(const nlohmann::json& j);
    static OrdinalLabelSpace load(const std::string& path);

private:
    std::vector<std::string> labels_;
};

struct RewardConfig {
    double lambda_ans = 0.8;
    double lambda_fmt = 0.2;
    double beta = 0.5;
    /// When false, in-space mismatches earn 0 like out-of-space answers.
    bool ordinal = true;

    void validate() const;
};

/// 1 on exact match, beta * (1 - |dr| / (K - 1)) for other labels in the
/// space, 0 otherwise. Throws LabelSpaceError when y_gt is not in the space.
double ordinal_reward(std::string_view y_pred, std::string_view y_gt, const OrdinalLabelSpace& space,
                      const RewardConfig& cfg = {});

/// 1 iff the output holds exactly one non-empty <reason>, <judge> and
/// <result> block, in that order.
int format_reward(std::string_view output);

/// Content of the single <result> block, if the output has one.
std::optional<std::string> extract_result(std::string_view output);

double total_reward(double r_ans, int r_fmt, const RewardConfig& cfg = {});

/// Share of verdicts equal to y_gt. Throws RewardError on an empty list.
double consistency_score(std::span<const std::string> verdicts, std::string_view y_gt,
                         const OrdinalLabelSpace& space);

struct ScoredSample {
    std::string id;
    double s_avg = 0.0;
};

/// Ids with lo <= s_avg <= hi, in input order.
std::vector<std::string> divergence_filter(std::span<const ScoredSample> samples, double lo = 0.2, double hi = 0.8);

} // namespace disputekit
