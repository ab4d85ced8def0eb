// SPDX-License-Identifier: Apache-2.0
#include "disputekit/error.hpp"
#include "disputekit/road_network.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace disputekit;

namespace {

RoadNetwork grid(int w, int h, std::uint64_t seed = 1) {
    NetworkParams p;
    p.seed = seed;
    p.width = w;
    p.height = h;
    return generate_network(p);
}

NodeId at(const RoadNetwork& net, int col, int row) { return static_cast<NodeId>(row * net.width() + col); }

} // namespace

TEST_CASE("pure grid generation") {
    const RoadNetwork net = grid(5, 5);
    CHECK(net.node_count() == 25);
    CHECK(net.edge_count() == 40);
    for (const Edge& e : net.edges()) {
        CHECK(e.length == doctest::Approx(100.0).epsilon(1e-12));
    }
}

TEST_CASE("generation is deterministic per seed") {
    NetworkParams p;
    p.seed = 42;
    p.width = 6;
    p.height = 7;
    p.jitter = 12;
    p.knockout_fraction = 0.2;
    const RoadNetwork a = generate_network(p);
    const RoadNetwork b = generate_network(p);
    CHECK(to_json(a) == to_json(b));
    p.seed = 43;
    CHECK(to_json(generate_network(p)) != to_json(a));
}

TEST_CASE("knockout removes the requested share and stays connected") {
    NetworkParams p;
    p.seed = 2;
    p.width = 10;
    p.height = 10;
    p.knockout_fraction = 0.1;
    const RoadNetwork net = generate_network(p);
    CHECK(net.edge_count() == 162);
    CHECK(is_connected(net.node_count(), net.edges()));
    for (NodeId id = 0; id < net.node_count(); ++id) {
        const int row = static_cast<int>(id) / 10;
        const int col = static_cast<int>(id) % 10;
        const bool boundary = row == 0 || col == 0 || row == 9 || col == 9;
        if (!boundary) {
            CHECK(net.neighbors(id).size() >= 2);
        }
    }
}

TEST_CASE("generation rejects impossible parameters") {
    NetworkParams p;
    p.width = 2;
    CHECK_THROWS_AS(generate_network(p), RoutingError);
    p.width = 5;
    p.knockout_fraction = 0.5;
    CHECK_THROWS_AS(generate_network(p), RoutingError);
    p.knockout_fraction = 0.0;
    p.jitter = 60;
    CHECK_THROWS_AS(generate_network(p), RoutingError);
}

TEST_CASE("network constructor validates edges and connectivity") {
    std::vector<GeoPoint> nodes{{0, 0}, {100, 0}, {200, 0}};
    CHECK_THROWS_AS(RoadNetwork(nodes, {{0, 1, 100, "a"}}), RoutingError);
    CHECK_THROWS_AS(RoadNetwork(nodes, {{0, 1, 90, "a"}, {1, 2, 100, "a"}}), RoutingError);
    CHECK_NOTHROW(RoadNetwork(nodes, {{0, 1, 100, "a"}, {1, 2, 100, "a"}}));
}

TEST_CASE("shortest_path basics") {
    const RoadNetwork net = grid(3, 3);
    const Polyline self = shortest_path(net, 4, 4);
    CHECK(self.size() == 1);
    CHECK(polyline_length(self) == 0.0);

    const Polyline edge = shortest_path(net, 0, 1);
    CHECK(edge.size() == 2);
    CHECK(polyline_length(edge) == doctest::Approx(100));

    const NodePath corner = shortest_node_path(net, 0, 8);
    const NodePath brute = oracle::exhaustive_shortest_path(net, 0, 8);
    CHECK(brute.length == doctest::Approx(400));
    CHECK(corner.length == doctest::Approx(400));
    CHECK(corner.nodes == brute.nodes);
    CHECK_THROWS_AS(shortest_node_path(net, 0, 99), RoutingError);
}

TEST_CASE("plan_route: straight path has no intersections") {
    const RoadNetwork net = grid(5, 5);
    const Route route = plan_route(net, {at(net, 0, 0), at(net, 2, 0), net.node(0), net.node(2)});
    CHECK(route.intersections.empty());
    REQUIRE(route.instructions.size() == 1);
    CHECK(route.instructions[0].street == "R0");
    CHECK(route.instructions[0].maneuver == Maneuver::arrive);
    CHECK(route.geo.front() == net.node(0));
    CHECK(route.geo.back() == net.node(2));
}

TEST_CASE("plan_route: one turn") {
    const RoadNetwork net = grid(5, 5);
    const NodeId a = at(net, 0, 0);
    const NodeId b = at(net, 2, 2);
    const Route route = plan_route(net, {a, b, net.node(a), net.node(b)});
    REQUIRE(route.intersections.size() == 1);
    REQUIRE(route.instructions.size() == 2);
    // Smallest-id tie break runs east along row 0 first, then north: a left turn.
    CHECK(route.instructions[0].street == "R0");
    CHECK(route.instructions[0].maneuver == Maneuver::left);
    CHECK(route.instructions[1].street == "C2");
    CHECK(route.geo[route.intersections[0]] == net.node(at(net, 2, 0)));
    CHECK(route.instructions[0].text == "continue on R0 for 200 m, then turn left at k_1");
    CHECK(route.instructions[1].text == "continue on C2 for 200 m, then arrive at the destination");
}

TEST_CASE("plan_route densifies to 10 m and accounts for every meter") {
    const RoadNetwork net = grid(5, 5);
    const NodeId a = at(net, 0, 0);
    const NodeId b = at(net, 4, 0);
    const Route route = plan_route(net, {a, b, net.node(a), net.node(b)});
    CHECK(polyline_length(route.geo) == doctest::Approx(400));
    CHECK(route.geo.size() >= 41);
    for (std::size_t i = 1; i < route.geo.size(); ++i) {
        CHECK(planar_distance(route.geo[i - 1], route.geo[i]) <= 10.0 + 1e-9);
    }

    NetworkParams p;
    p.seed = 5;
    p.width = 8;
    p.height = 8;
    p.jitter = 15;
    p.knockout_fraction = 0.2;
    const RoadNetwork rough = generate_network(p);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Route r = plan_route(rough, sample_poi_pair(rough, s, 300));
        double sum = 0.0;
        for (const Instruction& ins : r.instructions) {
            sum += ins.length;
        }
        CHECK(std::abs(sum - polyline_length(r.geo)) <= 1.0);
        CHECK(r.instructions.size() == r.intersections.size() + 1);
        for (std::size_t i = 1; i < r.intersections.size(); ++i) {
            CHECK(r.intersections[i] > r.intersections[i - 1]);
        }
        for (std::size_t k = 0; k < r.nodes.size(); ++k) {
            CHECK(r.geo[r.node_geo_index[k]] == rough.node(r.nodes[k]));
        }
        for (std::size_t idx : r.intersections) {
            CHECK(idx > 0);
            CHECK(idx + 1 < r.geo.size());
        }
        CHECK_NOTHROW(validate_polyline(r.geo));
    }
}

TEST_CASE("instruction_at assigns an intersection to the leaving segment") {
    const RoadNetwork net = grid(5, 5);
    const NodeId a = at(net, 0, 0);
    const NodeId b = at(net, 2, 2);
    const Route route = plan_route(net, {a, b, net.node(a), net.node(b)});
    CHECK(route.instruction_at(0) == 0);
    CHECK(route.instruction_at(route.intersections[0] - 1) == 0);
    CHECK(route.instruction_at(route.intersections[0]) == 1);
    CHECK(route.instruction_at(route.geo.size() - 1) == 1);
}

TEST_CASE("sample_poi_pair") {
    const RoadNetwork net = grid(6, 6);
    const PoiPair any = sample_poi_pair(net, 3, 0);
    CHECK(any.start_node != any.end_node);
    const PoiPair far = sample_poi_pair(net, 3, 500);
    CHECK(net.distances_from(far.start_node)[far.end_node] >= 500);
    CHECK(far.start == net.node(far.start_node));
    const PoiPair again = sample_poi_pair(net, 3, 500);
    CHECK(again.start_node == far.start_node);
    CHECK(again.end_node == far.end_node);
    CHECK_THROWS_AS(sample_poi_pair(net, 3, 1e6), RoutingError);
}

TEST_CASE("network JSON round trip") {
    NetworkParams p;
    p.seed = 9;
    p.width = 4;
    p.height = 5;
    p.jitter = 10;
    p.knockout_fraction = 0.1;
    const RoadNetwork net = generate_network(p);
    const RoadNetwork back = network_from_json(nlohmann::json::parse(to_json(net).dump()));
    CHECK(to_json(back) == to_json(net));
    CHECK_THROWS_AS(network_from_json(nlohmann::json{{"nodes", 3}}), RoutingError);
}
