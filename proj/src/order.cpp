// SPDX-License-Identifier: Apache-2.0
#include "disputekit/order.hpp"

#include "disputekit/error.hpp"
#include "disputekit/text.hpp"

#include <fstream>
#include <sstream>

namespace disputekit {

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error("order: missing mandatory field " + where + key);
    }
    return j.at(key);
}

GeoPoint point_from(const nlohmann::json& j, const char* key, const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_array() || v.size() != 2) {
        throw Error("order: field " + where + key + " must be [x, y]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

template <typename V>
std::map<std::string, V> map_from(const nlohmann::json& j, const char* key) {
    std::map<std::string, V> out;
    if (j.contains(key)) {
        for (const auto& [k, v] : j.at(key).items()) {
            out[k] = v.template get<V>();
        }
    }
    return out;
}

std::string fmt_point(GeoPoint p) { return text::format("(%.1f, %.1f)", p.x, p.y); }

} // namespace

OrderRecord order_from_json(const nlohmann::json& j) {
    try {
        OrderRecord o;
        o.id = require(j, "id", "").get<std::string>();
        const auto& init = require(j, "o_init", "");
        o.init.driver_location = point_from(init, "l_driver", "o_init.");
        o.init.start = point_from(init, "l_start", "o_init.");
        o.init.end = point_from(init, "l_end", "o_init.");
        require(init, "p_driver", "o_init.");
        require(init, "p_pass", "o_init.");
        o.init.driver_profile = map_from<std::string>(init, "p_driver");
        o.init.passenger_profile = map_from<std::string>(init, "p_pass");
        o.timestamp = require(j, "timestamp", "").get<std::int64_t>();
        o.driver_stats = map_from<double>(j, "f_driver");
        o.passenger_stats = map_from<double>(j, "f_pass");
        o.notes = map_from<std::string>(j, "notes");
        o.cancel_code = j.value("cancel_code", 0);
        o.image_ref = j.value("image_ref", std::string{});
        if (j.contains("ground_truth") && !j["ground_truth"].is_null()) {
            o.ground_truth = j["ground_truth"].get<std::string>();
        }
        o.ambiguous = j.value("ambiguous", false);
        if (j.contains("applicable_rules")) {
            o.applicable_rules = j["applicable_rules"].get<std::vector<std::string>>();
        }
        return o;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(std::string("order: malformed record: ") + ex.what());
    }
}

nlohmann::json to_json(const OrderRecord& o) {
    auto pt = [](GeoPoint p) { return nlohmann::json::array({p.x, p.y}); };
    nlohmann::json j{
        {"id", o.id},
        {"o_init",
         {{"l_driver", pt(o.init.driver_location)},
          {"l_start", pt(o.init.start)},
          {"l_end", pt(o.init.end)},
          {"p_driver", o.init.driver_profile},
          {"p_pass", o.init.passenger_profile}}},
        {"f_driver", o.driver_stats},
        {"f_pass", o.passenger_stats},
        {"notes", o.notes},
        {"cancel_code", o.cancel_code},
        {"image_ref", o.image_ref},
        {"timestamp", o.timestamp},
        {"ambiguous", o.ambiguous},
        {"applicable_rules", o.applicable_rules},
    };
    j["ground_truth"] = o.ground_truth ? nlohmann::json(*o.ground_truth) : nlohmann::json(nullptr);
    return j;
}

std::string order_text(const OrderRecord& o) {
    std::ostringstream out;
    out << "Order " << o.id << "\n";
    out << "Driver acceptance point: " << fmt_point(o.init.driver_location) << "\n";
    out << "Order start: " << fmt_point(o.init.start) << "\n";
    out << "Destination: " << fmt_point(o.init.end) << "\n";
    out << "Cancellation code: " << o.cancel_code << "\n";
    out << "Hour of day: " << ((o.timestamp / 3600) % 24 + 24) % 24 << "\n";
    for (const auto& [k, v] : o.init.driver_profile) {
        out << "Driver profile " << k << ": " << v << "\n";
    }
    for (const auto& [k, v] : o.init.passenger_profile) {
        out << "Passenger profile " << k << ": " << v << "\n";
    }
    for (const auto& [k, v] : o.driver_stats) {
        out << "Driver " << k << ": " << text::format("%.2f", v) << "\n";
    }
    for (const auto& [k, v] : o.passenger_stats) {
        out << "Passenger " << k << ": " << text::format("%.2f", v) << "\n";
    }
    for (const auto& [k, v] : o.notes) {
        out << "Note " << k << ": " << v << "\n";
    }
    return out.str();
}

std::string semantic_text(const OrderRecord& o) {
    std::string out;
    auto append = [&](const std::map<std::string, std::string>& m) {
        for (const auto& [k, v] : m) {
            if (!out.empty()) {
                out += ' ';
            }
            out += v;
        }
    };
    append(o.init.driver_profile);
    append(o.init.passenger_profile);
    append(o.notes);
    return out;
}

std::vector<OrderRecord> read_orders_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open orders file " + path);
    }
    std::vector<OrderRecord> orders;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            orders.push_back(order_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& ex) {
            throw Error(path + ":" + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return orders;
}

} // namespace disputekit
