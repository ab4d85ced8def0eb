// SPDX-License-Identifier: Apache-2.0
#include "disputekit/text.hpp"

namespace disputekit::text {

namespace {
bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
} // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) {
        ++b;
    }
    while (e > b && is_space(s[e - 1])) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

std::string casefold(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

bool contains(std::string_view haystack, std::string_view needle) {
    return haystack.find(needle) != std::string_view::npos;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    if (from.empty()) {
        return;
    }
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

std::vector<TaggedSpan> find_tagged(std::string_view s, std::string_view tag, std::size_t* unclosed) {
    const std::string open = "<" + std::string(tag) + ">";
    const std::string close = "</" + std::string(tag) + ">";
    std::vector<TaggedSpan> spans;
    std::size_t dangling = 0;
    std::size_t pos = s.find(open);
    while (pos != std::string_view::npos) {
        const std::size_t body = pos + open.size();
        const std::size_t end = s.find(close, body);
        const std::size_t next_open = s.find(open, body);
        if (end == std::string_view::npos) {
            // Every remaining opener is dangling.
            for (std::size_t p = pos; p != std::string_view::npos; p = s.find(open, p + open.size())) {
                ++dangling;
            }
            break;
        }
        if (next_open != std::string_view::npos && next_open < end) {
            ++dangling;
            pos = next_open;
            continue;
        }
        spans.push_back({std::string(s.substr(body, end - body)), pos, end + close.size()});
        pos = s.find(open, end + close.size());
    }
    if (unclosed != nullptr) {
        *unclosed = dangling;
    }
    return spans;
}

} // namespace disputekit::text
