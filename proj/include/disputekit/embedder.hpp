// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace disputekit {

/// Text to fixed-dimension dense vector with unit L2 norm. Implementations
/// must be deterministic.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(std::string_view text) const = 0;
    virtual std::size_t dimension() const = 0;
    /// Tag persisted next to stored vectors, e.g. "hashing-256".
    virtual std::string name() const = 0;
};

/// Feature-hashed bag of lower-cased tokens. Tokens are maximal runs of ASCII
/// alphanumerics or non-ASCII bytes; each adds 1 to bucket fnv1a(token) % dim.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dimension = 256);
    std::vector<double> embed(std::string_view text) const override;
    std::size_t dimension() const override { return dimension_; }
    std::string name() const override;

private:
    std::size_t dimension_;
};

/// Builds an embedder from its tag. Throws Error for unknown tags.
std::shared_ptr<const Embedder> make_embedder(std::string_view tag);

double inner_product(const std::vector<double>& a, const std::vector<double>& b);

} // namespace disputekit
