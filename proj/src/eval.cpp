// SPDX-License-Identifier: Apache-2.0
#include "disputekit/eval.hpp"

#include "disputekit/error.hpp"

namespace disputekit {

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json metrics_json(const ClassMetrics& m) {
    return {{"precision", optional_number(m.precision)},
            {"recall", optional_number(m.recall)},
            {"support", m.support},
            {"predicted", m.predicted},
            {"correct", m.correct}};
}

void finish(ClassMetrics& m) {
    if (m.predicted > 0) {
        m.precision = static_cast<double>(m.correct) / static_cast<double>(m.predicted);
    }
    if (m.support > 0) {
        m.recall = static_cast<double>(m.correct) / static_cast<double>(m.support);
    }
}

} // namespace

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json per_class = nlohmann::json::object();
    for (const auto& l : r.labels) {
        per_class[l] = metrics_json(r.per_class.at(l));
    }
    nlohmann::json groups = nlohmann::json::object();
    nlohmann::json group_order = nlohmann::json::array();
    for (const auto& [g, m] : r.groups) {
        groups[g] = metrics_json(m);
        group_order.push_back(g);
    }
    return {{"total", r.total},
            {"correct", r.correct},
            {"invalid", r.invalid},
            {"accuracy", r.accuracy},
            {"per_class", per_class},
            {"groups", groups},
            {"group_order", group_order},
            {"confusion", {{"labels", r.labels}, {"matrix", r.confusion}}}};
}

EvalReport evaluate(std::span<const std::string> preds, std::span<const std::string> gts,
                    const OrdinalLabelSpace& space, const std::map<std::string, std::string>& grouping) {
    if (preds.size() != gts.size()) {
        throw EvalError("predictions and ground truths differ in length");
    }
    if (preds.empty()) {
        throw EvalError("nothing to evaluate");
    }
    const std::size_t k = space.size();
    EvalReport r;
    r.labels = space.labels();
    r.confusion.assign(k, std::vector<std::size_t>(k + 1, 0));
    auto group_of = [&](const std::string& label) -> const std::string& {
        const auto it = grouping.find(label);
        if (it == grouping.end()) {
            throw EvalError("label " + label + " has no group");
        }
        return it->second;
    };
    std::map<std::string, ClassMetrics> by_group;
    for (const auto& l : r.labels) {
        r.per_class[l] = {};
        const auto& g = group_of(l);
        if (!by_group.count(g)) {
            by_group[g] = {};
            r.groups.emplace_back(g, ClassMetrics{});
        }
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto gt = space.parse(gts[i]);
        if (!gt) {
            throw EvalError("ground truth '" + gts[i] + "' is outside the label space");
        }
        std::optional<std::string> pred;
        if (!preds[i].empty()) {
            pred = space.parse(preds[i]);
            if (!pred) {
                throw EvalError("prediction '" + preds[i] + "' is outside the label space");
            }
        }
        const std::size_t row = space.rank(*gt) - 1;
        const std::size_t col = pred ? space.rank(*pred) - 1 : k;
        ++r.confusion[row][col];
        ++r.total;
        ++r.per_class[*gt].support;
        ++by_group[group_of(*gt)].support;
        if (!pred) {
            ++r.invalid;
            continue;
        }
        ++r.per_class[*pred].predicted;
        ++by_group[group_of(*pred)].predicted;
        if (*pred == *gt) {
            ++r.correct;
            ++r.per_class[*gt].correct;
        }
        if (group_of(*pred) == group_of(*gt)) {
            ++by_group[group_of(*gt)].correct;
        }
    }
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
    for (auto& [l, m] : r.per_class) {
        finish(m);
    }
    for (auto& [g, m] : r.groups) {
        m = by_group[g];
        finish(m);
    }
    return r;
}

} // namespace disputekit
