// SPDX-License-Identifier: Apache-2.0
#include "disputekit/corpus.hpp"

#include "disputekit/error.hpp"
#include "disputekit/rng.hpp"

#include <array>
#include <filesystem>
#include <fstream>

namespace disputekit {

LinkedRuleBase default_rule_base() {
    LinkedRuleBase r;
    r.base = RuleBase({
        {"normal-trip",
         "A trip that follows the planned route to the destination carries no driver liability."},
        {"gps-drift",
         "Position jumps consistent with satellite positioning drift, without a structural change of the path, are "
         "not attributed to the driver and are referred for platform review."},
        {"detour",
         "A driver who leaves the navigation route without passenger consent and lengthens the trip is partly "
         "liable for the extra distance."},
        {"reverse",
         "Driving against the planned heading so that the destination is never reached is a full liability "
         "violation."},
        {"overrun",
         "A driver who reaches the destination and keeps driving with the order still open is fully liable for "
         "misuse of the order."},
    });
    r.links = {{"normal-trip", {TrajectoryLabel::compliant}},
               {"gps-drift", {TrajectoryLabel::drift_only}},
               {"detour", {TrajectoryLabel::unintentional_deviation}},
               {"reverse", {TrajectoryLabel::reverse_driving}},
               {"overrun", {TrajectoryLabel::arrival_then_leave}}};
    return r;
}

LinkedRuleBase linked_rules_from_json(const nlohmann::json& j) {
    LinkedRuleBase r;
    r.base = rule_base_from_json(j);
    const nlohmann::json& arr = j.is_object() ? j.at("rules") : j;
    for (const auto& rule : arr) {
        auto& set = r.links[rule.at("id").get<std::string>()];
        for (const auto& c : rule.value("classes", nlohmann::json::array())) {
            const auto label = parse_trajectory_label(c.get<std::string>());
            if (!label) {
                throw CalibrationError("rule " + rule.at("id").get<std::string>() + " links unknown class " +
                                       c.get<std::string>());
            }
            set.insert(*label);
        }
    }
    return r;
}

nlohmann::json to_json(const LinkedRuleBase& rules) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rules.base.rules()) {
        nlohmann::json classes = nlohmann::json::array();
        if (const auto it = rules.links.find(r.id); it != rules.links.end()) {
            for (TrajectoryLabel l : it->second) {
                classes.push_back(label_name(l));
            }
        }
        arr.push_back({{"id", r.id}, {"clause", r.clause}, {"classes", classes}});
    }
    return {{"rules", arr}};
}

namespace {

const char* pick(Rng& rng, const std::vector<const char*>& pool) { return pool[rng.index(pool.size())]; }

const std::map<TrajectoryLabel, std::vector<const char*>>& complaints() {
    static const std::map<TrajectoryLabel, std::vector<const char*>> m{
        {TrajectoryLabel::compliant,
         {"I changed my plans and cancelled, the driver did nothing wrong.",
          "The trip was fine but I was charged a cancellation fee.",
          "Driver followed the app route, I just want the fee explained."}},
        {TrajectoryLabel::drift_only,
         {"The map showed the car jumping around, I think the driver was lost.",
          "The app track looks jagged and I am not sure where the driver went.",
          "The car icon kept jumping off the road during the ride."}},
        {TrajectoryLabel::unintentional_deviation,
         {"The driver took a different road than the app suggested and the fare went up.",
          "We went around an extra block instead of the suggested route.",
          "Driver ignored the navigation for part of the trip."}},
        {TrajectoryLabel::reverse_driving,
         {"The driver turned around and drove away from my destination, we never got there.",
          "The car went the opposite direction and the order was cancelled.",
          "Driver headed back the way we came and ended the trip early."}},
        {TrajectoryLabel::arrival_then_leave,
         {"I was dropped off but the driver kept the order running and drove off.",
          "The trip continued after I got out of the car.",
          "Driver did not end the order at my stop and kept driving."}},
    };
    return m;
}

const std::vector<const char*> kAppeals{
    "I followed the route as shown on my phone.",
    "Traffic forced me to adjust the route.",
    "The passenger asked me to change plans.",
    "I do not remember anything unusual on this trip.",
};

// Cancellation codes: 1 passenger request, 2 route dispute, 3 signal issue,
// 4 driver abort, 5 closed late.
int cancel_code_for(TrajectoryLabel label, Rng& rng) {
    if (rng.uniform() < 0.2) {
        return 1 + static_cast<int>(rng.index(5));
    }
    switch (label) {
    case TrajectoryLabel::compliant: return 1;
    case TrajectoryLabel::drift_only: return 3;
    case TrajectoryLabel::unintentional_deviation: return 2;
    case TrajectoryLabel::reverse_driving: return 4;
    case TrajectoryLabel::arrival_then_leave: return 5;
    }
    return 1;
}

} // namespace

std::vector<OrderRecord> orders_from_dataset(const std::vector<DatasetRecord>& records, const RuleLinks& links,
                                             const OrderSynthesis& options) {
    std::vector<OrderRecord> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const DatasetRecord& rec = records[i];
        Rng rng(derive_seed(options.seed, "order", i));
        OrderRecord o;
        o.id = rec.sample_id;
        o.init.driver_location = {rec.start.x + 150.0 * rng.normal(), rec.start.y + 150.0 * rng.normal()};
        o.init.start = rec.start;
        o.init.end = rec.end;
        o.init.driver_profile = {{"rating", rng.uniform() < 0.7 ? "4.8 and above" : "below 4.8"},
                                 {"tenure", rng.uniform() < 0.5 ? "over one year" : "under one year"}};
        o.init.passenger_profile = {{"tier", rng.uniform() < 0.3 ? "gold member" : "standard member"}};
        o.driver_stats = {{"detour_m", std::max(0.0, rec.stats.detour)},
                          {"max_offset_m", rec.stats.max_offset},
                          {"post_arrival_m", rec.stats.post_arrival_travel},
                          {"reached_destination", rec.stats.reaches_destination ? 1.0 : 0.0},
                          {"trip_m", rec.stats.length},
                          {"route_m", rec.route_length},
                          {"route_turns", static_cast<double>(rec.turn_count)},
                          {"stationary_s", std::floor(rng.uniform(0.0, 300.0))}};
        o.passenger_stats = {{"cancel_count_30d", static_cast<double>(rng.index(4))},
                             {"trips_30d", static_cast<double>(1 + rng.index(60))}};
        o.cancel_code = cancel_code_for(rec.label, rng);
        o.notes = {{"complaint", pick(rng, complaints().at(rec.label))}, {"appeal", pick(rng, kAppeals)}};
        o.image_ref = options.image_root.empty()
                          ? rec.image_path
                          : (std::filesystem::path(options.image_root) / rec.image_path).string();
        o.timestamp = options.t0 + static_cast<std::int64_t>(i) * options.spacing_s +
                      static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(options.spacing_s / 2)));
        const auto v = options.class_verdicts.find(label_name(rec.label));
        if (v != options.class_verdicts.end()) {
            o.ground_truth = v->second;
        }
        o.ambiguous = rng.uniform() < options.ambiguous_share;
        for (const auto& [rule, classes] : links) {
            if (classes.count(rec.label)) {
                o.applicable_rules.push_back(rule);
            }
        }
        out.push_back(std::move(o));
    }
    return out;
}

void write_orders_jsonl(const std::vector<OrderRecord>& orders, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write orders to " + path);
    }
    for (const auto& o : orders) {
        out << to_json(o).dump() << "\n";
    }
}

} // namespace disputekit
