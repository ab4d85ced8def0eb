// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string_view>

namespace disputekit::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

/// Minimum level that is written; defaults to warn.
void set_level(Level level);
Level level();

/// Redirects output (stderr by default). The stream must outlive logging.
void set_sink(std::ostream* sink);

/// One JSON object per line: {"ts": ..., "level": ..., "event": ..., ...fields}.
void event(Level level, std::string_view name, const nlohmann::json& fields = nlohmann::json::object());

} // namespace disputekit::log
