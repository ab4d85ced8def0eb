// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/backend.hpp"
#include "disputekit/embedder.hpp"

#include <cstdint>
#include <map>
#include <shared_mutex>
#include <string>
#include <vector>

namespace disputekit {

struct PrecedentEntry {
    std::uint64_t id = 0;
    std::string text;
    std::string verdict;
    std::int64_t timestamp = 0;
    std::vector<double> vector;
};

struct Neighbor {
    std::uint64_t id = 0;
    double similarity = 0.0;
    std::int64_t timestamp = 0;
    std::string text;
    std::string verdict;
};

/// Historical orders with their verdicts and unit-norm embeddings. Reads run
/// concurrently; inserts take an exclusive lock, so each retrieval sees one
/// consistent state.
class PrecedentStore {
public:
    PrecedentStore(std::size_t dimension, std::string embedder_tag);
    PrecedentStore(PrecedentStore&& other) noexcept;
    PrecedentStore& operator=(PrecedentStore&&) = delete;

    std::size_t dimension() const { return dimension_; }
    const std::string& embedder_tag() const { return embedder_tag_; }
    std::size_t size() const;
    std::vector<PrecedentEntry> entries() const;

    /// Embeds and appends; ids are assigned sequentially from 0.
    std::uint64_t insert(const std::string& text, const std::string& verdict, std::int64_t timestamp,
                         const Embedder& embedder);
    std::uint64_t insert_vector(const std::string& text, const std::string& verdict, std::int64_t timestamp,
                                std::vector<double> vector);

    /// Up to k entries with timestamp strictly before `at`, by descending
    /// cosine similarity; ties go to the earlier timestamp, then the lower id.
    std::vector<Neighbor> retrieve_topk(const std::string& query, std::int64_t at, std::size_t k,
                                        const Embedder& embedder) const;
    std::vector<Neighbor> retrieve_topk(const std::vector<double>& query, std::int64_t at, std::size_t k) const;

    void save(const std::string& path) const;
    static PrecedentStore load(const std::string& path);

private:
    std::size_t dimension_;
    std::string embedder_tag_;
    mutable std::shared_mutex mutex_;
    std::vector<PrecedentEntry> entries_;
};

struct MetaInsight {
    std::string text;
    std::vector<std::uint64_t> support;
    std::map<std::string, std::size_t> verdict_histogram;
};

nlohmann::json to_json(const MetaInsight& insight);

/// The fixed summarizer instruction; the neighbors follow it in the user message.
std::string render_insight_request(const std::vector<Neighbor>& neighbors);

/// Histogram is counted locally; the backend writes the summary text. No
/// neighbors yields a "no precedent" insight without a backend call.
MetaInsight summarize_insight(const std::vector<Neighbor>& neighbors, ReasoningBackend& summarizer,
                              const std::string& role_prompt);

} // namespace disputekit
