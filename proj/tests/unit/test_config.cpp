// SPDX-License-Identifier: Apache-2.0
#include "disputekit/config.hpp"
#include "disputekit/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace disputekit;
using nlohmann::json;

namespace {

std::string config_error_field(const json& j) {
    try {
        config_from_json(j);
    } catch (const ConfigError& ex) {
        return ex.field();
    }
    return "<accepted>";
}

} // namespace

TEST_CASE("an empty config yields the documented defaults") {
    const PipelineConfig cfg = config_from_json(json::object());
    CHECK(cfg.retrieval.k == 4);
    CHECK(cfg.coa.max_turns == 8);
    CHECK(cfg.reward.lambda_ans == doctest::Approx(0.8));
    CHECK(cfg.reward.lambda_fmt == doctest::Approx(0.2));
    CHECK(cfg.reward.beta == doctest::Approx(0.5));
    CHECK(cfg.mutation.sigma == doctest::Approx(12.0));
    CHECK_FALSE(cfg.labels.present);
    CHECK_THROWS_AS(cfg.label_space(), ConfigError);
}

TEST_CASE("validation errors name the offending field") {
    CHECK(config_error_field({{"mutation", {{"sigma", -1.0}}}}) == "mutation.sigma");
    CHECK(config_error_field({{"retrieval", {{"k", 0}}}}) == "retrieval.k");
    CHECK(config_error_field({{"coa", {{"max_turns", 0}}}}) == "coa.max_turns");
    CHECK(config_error_field({{"reward", {{"beta", "high"}}}}) == "reward.beta");
    CHECK(config_error_field({{"bench", {{"ablations", {"no_such"}}}}}) == "bench.ablations");
    CHECK(config_error_field({{"coa", {{"role_backends", {{"judge", "oracle"}}}}}}) == "coa.role_backends.judge");
}

TEST_CASE("unknown keys are rejected at any depth") {
    CHECK(config_error_field({{"sede", 1}}) == "sede");
    CHECK(config_error_field({{"network", {{"widht", 5}}}}) == "network.widht");
    CHECK(config_error_field({{"labels",
                               {{"labels", {"a", "b"}},
                                {"grouping", {{"a", "N"}, {"b", "M"}}},
                                {"class_verdicts", json::object()},
                                {"extra", true}}}}) == "labels.extra");
}

TEST_CASE("labels must cover every class and group every label") {
    json labels{{"labels", {"low", "high"}},
                {"grouping", {{"low", "Normal"}, {"high", "Malicious"}}},
                {"class_verdicts",
                 {{"compliant", "low"},
                  {"drift_only", "low"},
                  {"unintentional_deviation", "high"},
                  {"reverse_driving", "high"},
                  {"arrival_then_leave", "high"}}}};
    const auto ok = config_from_json({{"labels", labels}});
    CHECK(ok.label_space().size() == 2);

    auto missing_group = labels;
    missing_group["grouping"].erase("high");
    CHECK(config_error_field({{"labels", missing_group}}) == "labels.grouping");

    auto missing_class = labels;
    missing_class["class_verdicts"].erase("reverse_driving");
    CHECK(config_error_field({{"labels", missing_class}}) == "labels.class_verdicts");

    auto bad_verdict = labels;
    bad_verdict["class_verdicts"]["compliant"] = "medium";
    CHECK(config_error_field({{"labels", bad_verdict}}) == "labels.class_verdicts");
}

TEST_CASE("component seeds derive from the root seed") {
    const auto a = config_from_json({{"seed", 7}});
    const auto b = config_from_json({{"seed", 7}});
    const auto c = config_from_json({{"seed", 8}});
    CHECK(a.network.seed == b.network.seed);
    CHECK(a.mutation.seed == b.mutation.seed);
    CHECK(a.network.seed != c.network.seed);
    CHECK(a.network.seed != a.mutation.seed);
    CHECK(a.seed_for("dataset") != a.seed_for("orders"));
}

TEST_CASE("effective config echo round-trips") {
    const auto cfg = config_from_json({{"seed", 3}, {"retrieval", {{"k", 6}}}, {"coa", {{"backend", "fixed:x"}}}});
    json echo = to_json(cfg);
    CHECK(echo["retrieval"]["k"] == 6);
    CHECK(echo.contains("derived_seeds"));
    echo.erase("derived_seeds");
    const auto again = config_from_json(echo);
    CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("load_config accepts comments and resolves paths against its directory") {
    const auto dir = std::filesystem::temp_directory_path() / "disputekit_config_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "c.json";
    {
        std::ofstream out(path);
        out << "// comment line\n{\"seed\": 5, \"bench\": {\"rules\": \"rules.json\"}}\n";
    }
    const auto cfg = load_config(path.string());
    CHECK(cfg.seed == 5);
    CHECK(cfg.resolve(cfg.bench.rules) == (dir / "rules.json").string());
    CHECK(cfg.resolve("/abs/x.json") == "/abs/x.json");
    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), ConfigError);
    std::filesystem::remove_all(dir);
}
