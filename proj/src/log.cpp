// SPDX-License-Identifier: Apache-2.0
#include "disputekit/log.hpp"

#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>

namespace disputekit::log {

namespace {
std::atomic<Level> g_level{Level::warn};
std::ostream* g_sink = &std::cerr;
std::mutex g_mutex;

const char* level_name(Level l) {
    switch (l) {
    case Level::debug:
        return "debug";
    case Level::info:
        return "info";
    case Level::warn:
        return "warn";
    case Level::error:
        return "error";
    case Level::off:
        return "off";
    }
    return "info";
}
} // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void set_sink(std::ostream* sink) {
    std::lock_guard lock(g_mutex);
    g_sink = sink != nullptr ? sink : &std::cerr;
}

void event(Level level, std::string_view name, const nlohmann::json& fields) {
    if (level < g_level.load() || level == Level::off) {
        return;
    }
    nlohmann::json line = fields.is_object() ? fields : nlohmann::json{{"detail", fields}};
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    line["ts"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    line["level"] = level_name(level);
    line["event"] = std::string(name);
    std::lock_guard lock(g_mutex);
    *g_sink << line.dump() << '\n';
}

} // namespace disputekit::log
