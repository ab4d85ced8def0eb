// SPDX-License-Identifier: Apache-2.0
#include "disputekit/retrieval.hpp"

#include "disputekit/error.hpp"
#include "disputekit/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>

namespace disputekit {

PrecedentStore::PrecedentStore(std::size_t dimension, std::string embedder_tag)
    : dimension_(dimension), embedder_tag_(std::move(embedder_tag)) {
    if (dimension_ == 0) {
        throw RetrievalError("store dimension must be positive");
    }
}

PrecedentStore::PrecedentStore(PrecedentStore&& other) noexcept
    : dimension_(other.dimension_), embedder_tag_(std::move(other.embedder_tag_)) {
    std::unique_lock lock(other.mutex_);
    entries_ = std::move(other.entries_);
}

std::size_t PrecedentStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::vector<PrecedentEntry> PrecedentStore::entries() const {
    std::shared_lock lock(mutex_);
    return entries_;
}

std::uint64_t PrecedentStore::insert(const std::string& text, const std::string& verdict, std::int64_t timestamp,
                                     const Embedder& embedder) {
    if (embedder.dimension() != dimension_) {
        throw RetrievalError(text::format("embedder dimension %zu does not match store dimension %zu",
                                          embedder.dimension(), dimension_));
    }
    return insert_vector(text, verdict, timestamp, embedder.embed(text));
}

std::uint64_t PrecedentStore::insert_vector(const std::string& text, const std::string& verdict,
                                            std::int64_t timestamp, std::vector<double> vector) {
    if (text.empty()) {
        throw RetrievalError("precedent text must be non-empty");
    }
    if (vector.size() != dimension_) {
        throw RetrievalError(
            text::format("vector dimension %zu does not match store dimension %zu", vector.size(), dimension_));
    }
    double n = 0.0;
    for (double v : vector) {
        n += v * v;
    }
    if (std::abs(std::sqrt(n) - 1.0) > 1e-6) {
        throw RetrievalError("precedent vectors must have unit norm");
    }
    std::unique_lock lock(mutex_);
    const auto id = static_cast<std::uint64_t>(entries_.size());
    entries_.push_back({id, text, verdict, timestamp, std::move(vector)});
    return id;
}

std::vector<Neighbor> PrecedentStore::retrieve_topk(const std::string& query, std::int64_t at, std::size_t k,
                                                    const Embedder& embedder) const {
    if (embedder.dimension() != dimension_) {
        throw RetrievalError(text::format("embedder dimension %zu does not match store dimension %zu",
                                          embedder.dimension(), dimension_));
    }
    return retrieve_topk(embedder.embed(query), at, k);
}

std::vector<Neighbor> PrecedentStore::retrieve_topk(const std::vector<double>& query, std::int64_t at,
                                                    std::size_t k) const {
    if (k == 0) {
        throw RetrievalError("k must be at least 1");
    }
    if (query.size() != dimension_) {
        throw RetrievalError("query dimension does not match the store");
    }
    std::shared_lock lock(mutex_);
    std::vector<std::pair<double, const PrecedentEntry*>> scored;
    for (const auto& e : entries_) {
        if (e.timestamp < at) {
            scored.emplace_back(inner_product(query, e.vector), &e);
        }
    }
    auto better = [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        if (a.second->timestamp != b.second->timestamp) {
            return a.second->timestamp < b.second->timestamp;
        }
        return a.second->id < b.second->id;
    };
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
    std::vector<Neighbor> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const auto* e = scored[i].second;
        out.push_back({e->id, scored[i].first, e->timestamp, e->text, e->verdict});
    }
    return out;
}

void PrecedentStore::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw RetrievalError("cannot write store to " + path);
    }
    std::shared_lock lock(mutex_);
    out << nlohmann::json{{"type", "header"}, {"dimension", dimension_}, {"embedder", embedder_tag_}}.dump() << "\n";
    for (const auto& e : entries_) {
        out << nlohmann::json{{"type", "entry"},
                              {"id", e.id},
                              {"text", e.text},
                              {"verdict", e.verdict},
                              {"timestamp", e.timestamp},
                              {"vector", e.vector}}
                   .dump()
            << "\n";
    }
}

PrecedentStore PrecedentStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw RetrievalError("cannot open store " + path);
    }
    std::string line;
    try {
        if (!std::getline(in, line)) {
            throw RetrievalError(path + ": empty store file");
        }
        const auto header = nlohmann::json::parse(line);
        if (header.value("type", std::string{}) != "header") {
            throw RetrievalError(path + ": first line must be the store header");
        }
        PrecedentStore store(header.at("dimension").get<std::size_t>(), header.at("embedder").get<std::string>());
        while (std::getline(in, line)) {
            if (text::trim(line).empty()) {
                continue;
            }
            const auto j = nlohmann::json::parse(line);
            const auto id = store.insert_vector(j.at("text").get<std::string>(), j.at("verdict").get<std::string>(),
                                                j.at("timestamp").get<std::int64_t>(),
                                                j.at("vector").get<std::vector<double>>());
            if (j.contains("id") && j["id"].get<std::uint64_t>() != id) {
                throw RetrievalError(path + ": entry ids are not sequential");
            }
        }
        return store;
    } catch (const nlohmann::json::exception& ex) {
        throw RetrievalError(path + ": " + ex.what());
    }
}

nlohmann::json to_json(const MetaInsight& insight) {
    return {{"text", insight.text}, {"support", insight.support}, {"verdict_histogram", insight.verdict_histogram}};
}

std::string render_insight_request(const std::vector<Neighbor>& neighbors) {
    std::string out =
        "Below are historical orders similar to the current dispute, each with its final verdict. "
        "Identify the statistical commonalities and adjudication patterns they share and state them as a short "
        "guidance paragraph for the current case.\n";
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        const auto& n = neighbors[i];
        out += text::format("\n[Precedent %zu] verdict: %s; similarity: %.3f\n", i + 1, n.verdict.c_str(),
                            n.similarity);
        out += n.text;
        if (out.back() != '\n') {
            out += '\n';
        }
    }
    return out;
}

MetaInsight summarize_insight(const std::vector<Neighbor>& neighbors, ReasoningBackend& summarizer,
                              const std::string& role_prompt) {
    MetaInsight insight;
    if (neighbors.empty()) {
        insight.text = "No precedent is available for this order.";
        return insight;
    }
    for (const auto& n : neighbors) {
        insight.support.push_back(n.id);
        ++insight.verdict_histogram[n.verdict];
    }
    BackendRequest req;
    req.role = AgentRole::summarizer;
    req.role_prompt = role_prompt;
    req.messages.push_back({"user", render_insight_request(neighbors)});
    insight.text = text::trim(summarizer.complete(req));
    return insight;
}

} // namespace disputekit
