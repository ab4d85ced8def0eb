// SPDX-License-Identifier: Apache-2.0
#include "disputekit/reward.hpp"

#include "disputekit/error.hpp"
#include "disputekit/text.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

namespace disputekit {

OrdinalLabelSpace::OrdinalLabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) {
        throw LabelSpaceError("a label space needs at least two labels");
    }
    std::set<std::string> seen;
    for (auto& l : labels_) {
        l = text::trim(l);
        if (l.empty()) {
            throw LabelSpaceError("labels must be non-empty");
        }
        if (!seen.insert(text::casefold(l)).second) {
            throw LabelSpaceError("duplicate label " + l);
        }
    }
}

std::optional<std::string> OrdinalLabelSpace::parse(std::string_view t) const {
    const std::string key = text::casefold(text::trim(t));
    for (const auto& l : labels_) {
        if (text::casefold(l) == key) {
            return l;
        }
    }
    return std::nullopt;
}

std::size_t OrdinalLabelSpace::rank(std::string_view label) const {
    const auto canon = parse(label);
    if (!canon) {
        throw LabelSpaceError("label '" + std::string(label) + "' is not in the label space");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == *canon) {
            return i + 1;
        }
    }
    return 0;
}

nlohmann::json OrdinalLabelSpace::to_json() const { return {{"labels", labels_}}; }

OrdinalLabelSpace OrdinalLabelSpace::from_json(const nlohmann::json& j) {
    try {
        const auto& arr = j.is_object() ? j.at("labels") : j;
        return OrdinalLabelSpace(arr.get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& ex) {
        throw LabelSpaceError(std::string("malformed label space: ") + ex.what());
    }
}

OrdinalLabelSpace OrdinalLabelSpace::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw LabelSpaceError("cannot open label file " + path);
    }
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& ex) {
        throw LabelSpaceError(path + ": " + ex.what());
    }
}

void RewardConfig::validate() const {
    if (lambda_ans < 0.0) {
        throw ConfigError("reward.lambda_ans", "must be non-negative");
    }
    if (lambda_fmt < 0.0) {
        throw ConfigError("reward.lambda_fmt", "must be non-negative");
    }
    if (std::abs(lambda_ans + lambda_fmt - 1.0) > 1e-9) {
        throw ConfigError("reward.lambda_ans", "lambda_ans + lambda_fmt must equal 1");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw ConfigError("reward.beta", "must lie in (0, 1)");
    }
}

double ordinal_reward(std::string_view y_pred, std::string_view y_gt, const OrdinalLabelSpace& space,
                      const RewardConfig& cfg) {
    const std::size_t rg = space.rank(y_gt);
    const auto pred = space.parse(y_pred);
    if (!pred) {
        return 0.0;
    }
    const std::size_t rp = space.rank(*pred);
    if (rp == rg) {
        return 1.0;
    }
    if (!cfg.ordinal) {
        return 0.0;
    }
    const double dr = std::abs(static_cast<double>(rp) - static_cast<double>(rg));
    return cfg.beta * (1.0 - dr / static_cast<double>(space.size() - 1));
}

namespace {

struct Block {
    std::size_t open;
    std::size_t close;
    std::string body;
};

std::optional<Block> single_block(std::string_view s, std::string_view tag) {
    const std::string open = "<" + std::string(tag) + ">";
    const std::string close = "</" + std::string(tag) + ">";
    std::size_t opens = 0;
    std::size_t closes = 0;
    for (std::size_t p = s.find(open); p != std::string_view::npos; p = s.find(open, p + 1)) {
        ++opens;
    }
    for (std::size_t p = s.find(close); p != std::string_view::npos; p = s.find(close, p + 1)) {
        ++closes;
    }
    if (opens != 1 || closes != 1) {
        return std::nullopt;
    }
    const auto spans = text::find_tagged(s, tag);
    if (spans.size() != 1) {
        return std::nullopt;
    }
    return Block{spans[0].open, spans[0].close, std::string(spans[0].body)};
}

} // namespace

int format_reward(std::string_view output) {
    const auto reason = single_block(output, "reason");
    const auto judge = single_block(output, "judge");
    const auto result = single_block(output, "result");
    if (!reason || !judge || !result) {
        return 0;
    }
    if (!(reason->close <= judge->open && judge->close <= result->open)) {
        return 0;
    }
    for (const auto* b : {&*reason, &*judge, &*result}) {
        if (text::trim(b->body).empty()) {
            return 0;
        }
    }
    return 1;
}

std::optional<std::string> extract_result(std::string_view output) {
    const auto result = single_block(output, "result");
    if (!result) {
        return std::nullopt;
    }
    return text::trim(result->body);
}

double total_reward(double r_ans, int r_fmt, const RewardConfig& cfg) {
    return cfg.lambda_ans * r_ans + cfg.lambda_fmt * static_cast<double>(r_fmt);
}

double consistency_score(std::span<const std::string> verdicts, std::string_view y_gt,
                         const OrdinalLabelSpace& space) {
    if (verdicts.empty()) {
        throw RewardError("consistency score needs at least one verdict");
    }
    const auto gt = space.parse(y_gt);
    if (!gt) {
        throw LabelSpaceError("ground truth '" + std::string(y_gt) + "' is not in the label space");
    }
    std::size_t hits = 0;
    for (const auto& v : verdicts) {
        const auto p = space.parse(v);
        hits += p && *p == *gt;
    }
    return static_cast<double>(hits) / static_cast<double>(verdicts.size());
}

std::vector<std::string> divergence_filter(std::span<const ScoredSample> samples, double lo, double hi) {
    std::vector<std::string> kept;
    for (const auto& s : samples) {
        if (!(s.s_avg >= 0.0 && s.s_avg <= 1.0)) {
            throw RewardError("consistency score for " + s.id + " lies outside [0, 1]");
        }
        if (s.s_avg >= lo && s.s_avg <= hi) {
            kept.push_back(s.id);
        }
    }
    return kept;
}

} // namespace disputekit
