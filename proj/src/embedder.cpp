// SPDX-License-Identifier: Apache-2.0
#include "disputekit/embedder.hpp"

#include "disputekit/error.hpp"
#include "disputekit/rng.hpp"

#include <cmath>
#include <string>

namespace disputekit {

namespace {
bool token_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}
} // namespace

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) {
        throw Error("embedding dimension must be positive");
    }
}

std::string HashingEmbedder::name() const { return "hashing-" + std::to_string(dimension_); }

std::vector<double> HashingEmbedder::embed(std::string_view text) const {
    std::vector<double> v(dimension_, 0.0);
    bool any = false;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            v[fnv1a64(token) % dimension_] += 1.0;
            token.clear();
            any = true;
        }
    };
    for (unsigned char c : text) {
        if (token_char(c)) {
            token.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else {
            flush();
        }
    }
    flush();
    if (!any) {
        // Empty input still gets a unit vector.
        v[fnv1a64("<empty>") % dimension_] = 1.0;
        return v;
    }
    double n = 0.0;
    for (double x : v) {
        n += x * x;
    }
    n = std::sqrt(n);
    for (double& x : v) {
        x /= n;
    }
    return v;
}

std::shared_ptr<const Embedder> make_embedder(std::string_view tag) {
    constexpr std::string_view prefix = "hashing-";
    if (tag.substr(0, prefix.size()) == prefix) {
        const std::string digits(tag.substr(prefix.size()));
        try {
            std::size_t used = 0;
            const unsigned long dim = std::stoul(digits, &used);
            if (used == digits.size() && dim > 0) {
                return std::make_shared<HashingEmbedder>(dim);
            }
        } catch (const std::exception&) {
        }
    }
    throw Error("unknown embedder tag '" + std::string(tag) + "'");
}

double inner_product(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

} // namespace disputekit
