// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace disputekit {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// SplitMix64 finalizer; a bijective mixer on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for a labeled sub-procedure, so every random stream hangs off
/// one root seed: derive_seed(root, "mutation", i).
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0) noexcept;

/// Seeded random source. Conversions from raw bits are done here rather than
/// with <random> distributions so that streams are identical on every
/// standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform();

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n);

    /// Standard normal via Box-Muller.
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace disputekit
