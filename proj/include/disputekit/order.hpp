// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/geo.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace disputekit {

/// Static information fixed at order acceptance.
struct OrderInit {
    GeoPoint driver_location; // l_driver
    GeoPoint start;           // l_start
    GeoPoint end;             // l_end
    std::map<std::string, std::string> driver_profile;
    std::map<std::string, std::string> passenger_profile;
};

/// A disputed order: textual context, behavioral statistics, a reference to
/// the rendered trajectory image and the annotations used for training.
struct OrderRecord {
    std::string id;
    OrderInit init;
    std::map<std::string, double> driver_stats;    // e.g. stationary_s, detour_m
    std::map<std::string, double> passenger_stats;
    std::map<std::string, std::string> notes;      // complaint, appeal, ...
    int cancel_code = 0;
    std::string image_ref;
    std::int64_t timestamp = 0; // seconds
    std::optional<std::string> ground_truth;
    bool ambiguous = false;
    std::vector<std::string> applicable_rules; // rule ids, calibration annotation
};

/// Throws Error naming the missing field when a mandatory key is absent.
OrderRecord order_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OrderRecord& order);

/// Deterministic rendering of the textual context: ids, locations, profiles,
/// statistics and notes. Never includes the image reference or annotations.
std::string order_text(const OrderRecord& order);

/// Free-text fields (profiles and notes) joined for semantic embedding.
std::string semantic_text(const OrderRecord& order);

/// Reads one order per non-empty line.
std::vector<OrderRecord> read_orders_jsonl(const std::string& path);

} // namespace disputekit
