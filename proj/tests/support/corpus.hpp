// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/calibration.hpp"
#include "disputekit/order.hpp"
#include "disputekit/rng.hpp"

#include <string>
#include <vector>

namespace testcorpus {

inline disputekit::RuleBase planted_rules() {
    return disputekit::RuleBase({
        {"R1", "A detour longer than 300 m without passenger consent is a driver violation."},
        {"R2", "Waiting at the pickup for more than 600 s entitles the driver to a waiting fee."},
        {"R3", "A passenger cancelling after driver arrival owes a cancellation fee."},
        {"R4", "Orders at night require the driver to follow the navigation route."},
    });
}

/// Orders whose rule applicability is a deterministic function of one field:
/// R1 iff detour_m > 300, R2 iff stationary_s > 600, R3 iff cancel_code == 2,
/// R4 iff hour >= 22 or hour < 5.
inline std::vector<disputekit::OrderRecord> planted_orders(std::size_t n, std::uint64_t seed,
                                                           std::int64_t t0 = 1'700'000'000) {
    using namespace disputekit;
    Rng rng(seed);
    const char* complaints[] = {"driver took a long way", "driver never arrived", "route was strange",
                                "waited a long time", "driver was rude", "cancelled by mistake"};
    std::vector<OrderRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        OrderRecord o;
        o.id = "o" + std::to_string(seed) + "_" + std::to_string(i);
        o.init.driver_location = {rng.uniform(0, 900), rng.uniform(0, 900)};
        o.init.start = {rng.uniform(0, 900), rng.uniform(0, 900)};
        o.init.end = {rng.uniform(0, 900), rng.uniform(0, 900)};
        o.init.driver_profile = {{"rating", rng.uniform() < 0.5 ? "high" : "average"}};
        o.init.passenger_profile = {{"tier", rng.uniform() < 0.5 ? "gold" : "basic"}};
        const double detour = rng.uniform(0, 600);
        const double stationary = rng.uniform(0, 1200);
        o.driver_stats = {{"detour_m", detour}, {"stationary_s", stationary}};
        o.passenger_stats = {{"cancel_count", static_cast<double>(rng.index(5))}};
        o.cancel_code = static_cast<int>(rng.index(4));
        o.notes = {{"complaint", complaints[rng.index(6)]}};
        o.timestamp = t0 + static_cast<std::int64_t>(i) * 3600 + static_cast<std::int64_t>(rng.index(3600));
        const auto hour = (o.timestamp / 3600) % 24;
        if (detour > 300) {
            o.applicable_rules.push_back("R1");
        }
        if (stationary > 600) {
            o.applicable_rules.push_back("R2");
        }
        if (o.cancel_code == 2) {
            o.applicable_rules.push_back("R3");
        }
        if (hour >= 22 || hour < 5) {
            o.applicable_rules.push_back("R4");
        }
        out.push_back(std::move(o));
    }
    return out;
}

} // namespace testcorpus
