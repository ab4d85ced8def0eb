// SPDX-License-Identifier: Apache-2.0
#include "disputekit/dataset.hpp"
#include "disputekit/error.hpp"

#include "../support/raster.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace disputekit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("disputekit_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ClassMix uniform_mix() {
    ClassMix mix;
    for (TrajectoryLabel l : kTrajectoryLabels) {
        mix[l] = 0.2;
    }
    return mix;
}

} // namespace

TEST_CASE("captions") {
    NetworkParams p;
    p.width = 5;
    p.height = 5;
    const RoadNetwork net = generate_network(p);
    const Route route = plan_route(net, {5, 23, net.node(5), net.node(23)});
    LabeledTrajectory t;
    t.path = route.geo;
    CHECK(instantiate_caption(route, t) == "The driver followed the planned route through 1 turn without deviation.");

    t.label = TrajectoryLabel::arrival_then_leave;
    t.provenance.escape_distance = 321.4;
    const std::string leave = instantiate_caption(route, t);
    CHECK(leave.find("departed after arriving") != std::string::npos);
    CHECK(leave.find("321 m") != std::string::npos);
}

TEST_CASE("deviation caption names the street leaving the anchor") {
    // East on R0, north on C1, east again on R3: k_1 at (100,0), k_2 at (100,300).
    std::vector<GeoPoint> nodes{{0, 0}, {100, 0}, {100, 100}, {100, 200}, {100, 300}, {200, 300}, {300, 300}};
    std::vector<Edge> edges{{0, 1, 100, "R0"}, {1, 2, 100, "C1"}, {2, 3, 100, "C1"},
                            {3, 4, 100, "C1"}, {4, 5, 100, "R3"}, {5, 6, 100, "R3"}};
    const RoadNetwork net(nodes, edges);
    const Route route = plan_route(net, {0, 6, nodes[0], nodes[6]});
    REQUIRE(route.intersections.size() == 2);
    LabeledTrajectory t;
    t.label = TrajectoryLabel::unintentional_deviation;
    t.provenance.anchor_index = route.intersections[1];
    t.provenance.anchor_intersection = 2;
    const std::string caption = instantiate_caption(route, t);
    CHECK(caption.find("deviated") != std::string::npos);
    CHECK(caption.find("R3") != std::string::npos);
    CHECK(caption.find("k_2") != std::string::npos);
    CHECK(oracle::caption_matches_label(caption, "unintentional_deviation"));
}

TEST_CASE("class counts follow the mix") {
    const auto counts = class_counts(uniform_mix(), 100);
    for (TrajectoryLabel l : kTrajectoryLabels) {
        CHECK(counts.at(l) == 20);
    }
    ClassMix thirds{{TrajectoryLabel::compliant, 1.0 / 3}, {TrajectoryLabel::reverse_driving, 1.0 / 3},
                    {TrajectoryLabel::arrival_then_leave, 1.0 / 3}};
    const auto c = class_counts(thirds, 10);
    CHECK(c.at(TrajectoryLabel::compliant) == 4);
    CHECK(c.at(TrajectoryLabel::reverse_driving) == 3);
    CHECK(c.at(TrajectoryLabel::arrival_then_leave) == 3);
    CHECK_THROWS_AS(class_counts({{TrajectoryLabel::compliant, 0.5}}, 10), DatasetError);
}

TEST_CASE("build_dataset writes images and a reproducible manifest") {
    NetworkParams p;
    p.width = 10;
    p.height = 10;
    p.seed = 21;
    const RoadNetwork net = generate_network(p);
    MutationConfig cfg;
    RenderSpec spec;
    spec.width = 96;
    spec.height = 96;
    DatasetOptions opts;
    opts.seed = 77;
    opts.workers = 2;

    const fs::path a = scratch("dataset_a");
    const fs::path b = scratch("dataset_b");
    const auto records = build_dataset(net, 20, uniform_mix(), cfg, spec, a, opts);
    build_dataset(net, 20, uniform_mix(), cfg, spec, b, opts);
    CHECK(records.size() == 20);
    CHECK(slurp(a / "manifest.jsonl") == slurp(b / "manifest.jsonl"));

    std::size_t lines = 0;
    std::map<std::string, int> per_label;
    std::ifstream in(a / "manifest.jsonl");
    for (std::string line; std::getline(in, line);) {
        ++lines;
        const auto j = nlohmann::json::parse(line);
        for (const char* key : {"image_path", "caption", "label", "provenance", "route_id", "sample_id"}) {
            CHECK(j.contains(key));
        }
        CHECK(fs::exists(a / j["image_path"].get<std::string>()));
        CHECK(oracle::caption_matches_label(j["caption"], j["label"]));
        ++per_label[j["label"]];
    }
    CHECK(lines == 20);
    for (const auto& [label, count] : per_label) {
        CHECK(count == 4);
    }
    std::size_t images = 0;
    for (const auto& entry : fs::directory_iterator(a / "images")) {
        images += entry.path().extension() == ".png" ? 1 : 0;
    }
    CHECK(images == 20);
    CHECK(slurp(a / "images/s000003.png") == slurp(b / "images/s000003.png"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("build_dataset rejects bad inputs") {
    NetworkParams p;
    p.width = 6;
    p.height = 6;
    const RoadNetwork net = generate_network(p);
    MutationConfig cfg;
    RenderSpec spec;
    spec.width = 64;
    spec.height = 64;
    CHECK_THROWS_AS(build_dataset(net, 5, uniform_mix(), cfg, spec, "/proc/disputekit_cannot_write"), DatasetError);
    cfg.sigma = 0;
    CHECK_THROWS_AS(build_dataset(net, 5, uniform_mix(), cfg, spec, scratch("dataset_c")), DatasetError);
}
