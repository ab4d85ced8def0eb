// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/calibration.hpp"
#include "disputekit/dataset.hpp"
#include "disputekit/order.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace disputekit {

/// Which synthetic classes make a rule applicable.
using RuleLinks = std::map<std::string, std::set<TrajectoryLabel>>;

struct LinkedRuleBase {
    RuleBase base;
    RuleLinks links;
};

/// Five rules, one per synthetic class.
LinkedRuleBase default_rule_base();

/// Rule base JSON whose entries may carry "classes": [class names].
LinkedRuleBase linked_rules_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LinkedRuleBase& rules);

struct OrderSynthesis {
    std::uint64_t seed = 0;
    std::int64_t t0 = 1'700'000'000; // first order time, seconds
    std::int64_t spacing_s = 900;    // mean gap between orders
    std::map<std::string, std::string> class_verdicts; // trajectory class -> verdict label
    double ambiguous_share = 0.0;
    std::string image_root; // prefix for image_ref
};

/// Turns rendered samples into disputed orders: trajectory statistics become
/// driver statistics, notes are drawn from per-class phrase pools and the
/// verdict comes from `class_verdicts`. Timestamps increase with the index.
std::vector<OrderRecord> orders_from_dataset(const std::vector<DatasetRecord>& records, const RuleLinks& links,
                                             const OrderSynthesis& options);

void write_orders_jsonl(const std::vector<OrderRecord>& orders, const std::string& path);

} // namespace disputekit
