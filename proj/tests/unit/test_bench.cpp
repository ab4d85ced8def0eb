// SPDX-License-Identifier: Apache-2.0
#include "disputekit/bench.hpp"
#include "disputekit/order.hpp"

#include "../support/bench_config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace disputekit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("disputekit_bench_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("oracle backends reach perfect accuracy") {
    auto j = testcorpus::small_bench(11, "oracle");
    j["bench"]["ablations"] = {"no_refinement", "no_insight", "no_calibration", "binary_reward"};
    const auto cfg = config_from_json(j);
    const auto dir = scratch("oracle");
    const auto res = run_benchmark(cfg, dir);
    REQUIRE(res.variants.size() == 5);
    for (const auto& v : res.variants) {
        CAPTURE(v.name);
        CHECK(v.failures == 0);
        CHECK(v.report.accuracy == 1.0);
        for (const auto& [g, m] : v.report.groups) {
            CHECK(m.precision.value_or(0) == 1.0);
            CHECK(m.recall.value_or(0) == 1.0);
        }
    }
    // Exact answers earn the full answer reward; refined outputs also earn the format term.
    CHECK(res.variants[0].mean_total_reward == doctest::Approx(1.0));
    CHECK(res.report["schema_version"] == 1);
    for (const std::string f : {"report.json", "audit.jsonl", "orders.jsonl", "rules.json", "labels.json", "ensemble.json",
                          "store.jsonl", "network.json", "dataset/manifest.jsonl"}) {
        CAPTURE(f);
        CHECK(fs::exists(dir / f));
    }
    std::ifstream audit(dir / "audit.jsonl");
    std::size_t lines = 0;
    for (std::string line; std::getline(audit, line);) {
        ++lines;
    }
    CHECK(lines == 5 * 20);
    fs::remove_all(dir);
}

TEST_CASE("a fixed label scores its base rate") {
    const auto cfg = config_from_json(testcorpus::small_bench(12, "fixed:full_liability"));
    const auto dir = scratch("fixed");
    const auto res = run_benchmark(cfg, dir);
    const auto orders = read_orders_jsonl((dir / "orders.jsonl").string());
    std::size_t hits = 0;
    for (std::size_t i = cfg.bench.history; i < orders.size(); ++i) {
        hits += *orders[i].ground_truth == "full_liability";
    }
    CHECK(res.variants[0].report.accuracy ==
          doctest::Approx(static_cast<double>(hits) / static_cast<double>(cfg.bench.eval)));
    fs::remove_all(dir);
}

TEST_CASE("identical configs give byte-identical reports") {
    const auto cfg = config_from_json(testcorpus::small_bench(13, "oracle"));
    const auto a = scratch("rerun_a");
    const auto b = scratch("rerun_b");
    run_benchmark(cfg, a);
    auto single = cfg;
    single.workers = 1;
    run_benchmark(single, b);
    for (const std::string f : {"report.json", "audit.jsonl", "orders.jsonl", "ensemble.json", "store.jsonl"}) {
        CAPTURE(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("backend failures are recorded per order") {
    // An unreachable HTTP endpoint fails every session without aborting the run.
    auto j = testcorpus::small_bench(14, "http://127.0.0.1:9/complete");
    j["coa"]["max_retries"] = 0;
    j["bench"]["eval"] = 3;
    const auto cfg = config_from_json(j);
    const auto dir = scratch("failing");
    const auto res = run_benchmark(cfg, dir);
    CHECK(res.variants[0].failures == 3);
    CHECK(res.variants[0].report.invalid == 3);
    CHECK(res.report["variants"]["full"]["failure_rate"] == 1.0);
    fs::remove_all(dir);
}
