// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace disputekit::text {

std::string trim(std::string_view s);

/// ASCII lower-casing; other bytes pass through.
std::string casefold(std::string_view s);

bool contains(std::string_view haystack, std::string_view needle);

void replace_all(std::string& s, std::string_view from, std::string_view to);

/// printf-style formatting into a std::string.
template <typename... Args>
std::string format(const char* fmt, Args... args) {
    const int n = std::snprintf(nullptr, 0, fmt, args...);
    std::string out(static_cast<std::size_t>(n), '\0');
    std::snprintf(out.data(), out.size() + 1, fmt, args...);
    return out;
}

/// One tagged span found by `find_tagged`.
struct TaggedSpan {
    std::string body;
    std::size_t open = 0;  // offset of '<'
    std::size_t close = 0; // offset one past the closing tag
};

/// Every well-formed <tag>...</tag> span, left to right, non-nested.
/// `unclosed` receives the number of opening tags with no matching close.
std::vector<TaggedSpan> find_tagged(std::string_view s, std::string_view tag, std::size_t* unclosed = nullptr);

} // namespace disputekit::text
