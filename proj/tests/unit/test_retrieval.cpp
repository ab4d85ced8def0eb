// SPDX-License-Identifier: Apache-2.0
#include "disputekit/backend.hpp"
#include "disputekit/embedder.hpp"
#include "disputekit/error.hpp"
#include "disputekit/retrieval.hpp"
#include "disputekit/rng.hpp"

#include "../support/retrieval_oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <atomic>
#include <fstream>
#include <thread>

using namespace disputekit;
using oracle::brute_force;
using oracle::random_store;
using oracle::random_unit;

namespace {

class CountingBackend final : public ReasoningBackend {
public:
    std::string complete(const BackendRequest&) override {
        ++calls;
        return "summary";
    }
    std::string name() const override { return "counting"; }
    int calls = 0;
};

class FailingBackend final : public ReasoningBackend {
public:
    std::string complete(const BackendRequest&) override { throw BackendError("endpoint unavailable"); }
    std::string name() const override { return "failing"; }
};

} // namespace

TEST_CASE("insert appends unit vectors with stable ids") {
    HashingEmbedder emb(64);
    PrecedentStore store(64, emb.name());
    CHECK(store.insert("driver detoured", "y1", 10, emb) == 0);
    CHECK(store.size() == 1);
    CHECK(store.insert("driver detoured", "y2", 11, emb) == 1);
    const auto entries = store.entries();
    CHECK(entries[0].vector == entries[1].vector);
    CHECK(inner_product(entries[0].vector, entries[0].vector) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(store.insert("x", "y", 1, HashingEmbedder(32)), RetrievalError);
    CHECK_THROWS_AS(store.insert("", "y", 1, emb), RetrievalError);
    CHECK_THROWS_AS(store.insert_vector("x", "y", 1, std::vector<double>(64, 1.0)), RetrievalError);
}

TEST_CASE("retrieval honours similarity and the strict time cutoff") {
    HashingEmbedder emb(128);
    PrecedentStore store(128, emb.name());
    store.insert("driver waited at pickup for twenty minutes", "y1", 100, emb);
    store.insert("passenger cancelled after the driver arrived", "y2", 200, emb);
    store.insert("driver took a long detour on the highway", "y3", 300, emb);
    const auto hit = store.retrieve_topk("passenger cancelled after the driver arrived", 1000, 1, emb);
    REQUIRE(hit.size() == 1);
    CHECK(hit[0].id == 1);
    CHECK(hit[0].similarity == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(store.retrieve_topk("anything", 100, 4, emb).empty());
    CHECK(store.retrieve_topk("anything", 201, 4, emb).size() == 2);
    CHECK(store.retrieve_topk("anything", 5000, 10, emb).size() == 3);
    CHECK_THROWS_AS(store.retrieve_topk("anything", 5000, 0, emb), RetrievalError);
}

TEST_CASE("retrieval equals a brute-force sort and never leaks later entries") {
    Rng rng(2024);
    {
        auto store = random_store(rng, 20, 8);
        for (int q = 0; q < 50; ++q) {
            const auto v = random_unit(rng, 8);
            const auto at = static_cast<std::int64_t>(rng.index(60));
            std::vector<std::uint64_t> got;
            for (const auto& n : store.retrieve_topk(v, at, 4)) {
                got.push_back(n.id);
            }
            CHECK(got == brute_force(store, v, at, 4));
        }
    }
    for (int s = 0; s < 25; ++s) {
        auto store = random_store(rng, 1 + rng.index(300), 16);
        const auto entries = store.entries();
        for (int q = 0; q < 40; ++q) {
            const auto v = rng.uniform() < 0.2 ? entries[rng.index(entries.size())].vector : random_unit(rng, 16);
            const auto at = static_cast<std::int64_t>(rng.index(60));
            const std::size_t k = 1 + rng.index(8);
            const auto result = store.retrieve_topk(v, at, k);
            std::vector<std::uint64_t> got;
            for (const auto& n : result) {
                got.push_back(n.id);
                CHECK(n.timestamp < at);
            }
            CHECK(got == brute_force(store, v, at, k));
        }
    }
}

TEST_CASE("embeddings have unit self-similarity") {
    HashingEmbedder emb;
    Rng rng(7);
    const char* words[] = {"driver", "late", "route", "cancel", "fee", "detour", "wait", "pickup"};
    for (int i = 0; i < 100; ++i) {
        std::string t;
        for (std::size_t w = 0, n = 1 + rng.index(12); w < n; ++w) {
            t += std::string(words[rng.index(8)]) + " ";
        }
        const auto v = emb.embed(t);
        CHECK(std::abs(inner_product(v, v) - 1.0) <= 1e-6);
    }
}

TEST_CASE("store persists to JSONL and reloads identically") {
    Rng rng(5);
    auto store = random_store(rng, 40, 12);
    const auto path = std::filesystem::temp_directory_path() / "disputekit_store_test.jsonl";
    store.save(path.string());
    const auto copy = PrecedentStore::load(path.string());
    CHECK(copy.size() == 40);
    CHECK(copy.dimension() == 12);
    CHECK(copy.embedder_tag() == "random");
    const auto q = random_unit(rng, 12);
    const auto a = store.retrieve_topk(q, 30, 8);
    const auto b = copy.retrieve_topk(q, 30, 8);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].similarity == b[i].similarity);
    }
    {
        std::ofstream bad(path);
        bad << "{\"type\":\"entry\"}\n";
    }
    CHECK_THROWS_AS(PrecedentStore::load(path.string()), RetrievalError);
    std::filesystem::remove(path);
}

TEST_CASE("concurrent readers and a writer see consistent states") {
    HashingEmbedder emb(32);
    PrecedentStore store(32, emb.name());
    for (int i = 0; i < 50; ++i) {
        store.insert("seed entry " + std::to_string(i), "y1", i, emb);
    }
    std::atomic<bool> ok{true};
    std::vector<std::thread> threads;
    threads.emplace_back([&] {
        for (int i = 50; i < 250; ++i) {
            store.insert("late entry " + std::to_string(i), "y2", i, emb);
        }
    });
    for (int r = 0; r < 3; ++r) {
        threads.emplace_back([&] {
            for (int i = 0; i < 200; ++i) {
                const auto res = store.retrieve_topk("entry", 40, 4, emb);
                if (res.size() != 4) {
                    ok = false;
                }
                for (const auto& n : res) {
                    if (n.timestamp >= 40) {
                        ok = false;
                    }
                }
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    CHECK(ok);
    CHECK(store.size() == 250);
}

TEST_CASE("insight histograms are counted locally") {
    CountingBackend backend;
    std::vector<Neighbor> four(4);
    for (std::size_t i = 0; i < 4; ++i) {
        four[i] = {i, 0.9, 1, "t", "y2"};
    }
    const auto a = summarize_insight(four, backend, "p");
    CHECK(a.verdict_histogram == std::map<std::string, std::size_t>{{"y2", 4}});
    CHECK(a.support.size() == 4);
    four[0].verdict = "y1";
    four[1].verdict = "y3";
    four[2].verdict = "y3";
    four[3].verdict = "y3";
    CHECK(summarize_insight(four, backend, "p").verdict_histogram ==
          std::map<std::string, std::size_t>{{"y1", 1}, {"y3", 3}});
    CHECK(backend.calls == 2);

    const auto none = summarize_insight({}, backend, "p");
    CHECK(backend.calls == 2);
    CHECK(none.support.empty());
    CHECK(none.text.find("No precedent") != std::string::npos);

    ScriptedBackend echo({}, std::string("Summary of: {{last}}"));
    const auto s1 = summarize_insight(four, echo, "p");
    const auto s2 = summarize_insight(four, echo, "p");
    CHECK(s1.text == s2.text);
    CHECK(s1.text.find("[Precedent 4] verdict: y3") != std::string::npos);

    FailingBackend failing;
    try {
        summarize_insight(four, failing, "p");
        FAIL("expected a backend error");
    } catch (const BackendError& ex) {
        CHECK(ex.retriable());
    }
}
