// SPDX-License-Identifier: Apache-2.0
#include "disputekit/road_network.hpp"

#include "disputekit/error.hpp"
#include "disputekit/rng.hpp"
#include "disputekit/text.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace disputekit {

namespace {

constexpr double kEdgeLengthTolerance = 1e-6;

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<std::vector<Adjacent>> build_adjacency(std::size_t n, std::span<const Edge> edges) {
    std::vector<std::vector<Adjacent>> adj(n);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        adj[edges[i].a].push_back({edges[i].b, i});
        adj[edges[i].b].push_back({edges[i].a, i});
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end(), [](const Adjacent& l, const Adjacent& r) {
            return l.node < r.node;
        });
    }
    return adj;
}

} // namespace

bool is_connected(std::size_t node_count, std::span<const Edge> edges) {
    if (node_count == 0) {
        return true;
    }
    const auto adj = build_adjacency(node_count, edges);
    std::vector<char> seen(node_count, 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t visited = 1;
    while (!stack.empty()) {
        const NodeId u = stack.back();
        stack.pop_back();
        for (const Adjacent& e : adj[u]) {
            if (!seen[e.node]) {
                seen[e.node] = 1;
                ++visited;
                stack.push_back(e.node);
            }
        }
    }
    return visited == node_count;
}

RoadNetwork::RoadNetwork(std::vector<GeoPoint> nodes, std::vector<Edge> edges, std::uint64_t seed,
                         int width, int height)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), seed_(seed), width_(width), height_(height) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!is_valid(nodes_[i])) {
            throw RoutingError("node " + std::to_string(i) + " has invalid coordinates");
        }
    }
    for (const Edge& e : edges_) {
        if (e.a >= nodes_.size() || e.b >= nodes_.size() || e.a == e.b) {
            throw RoutingError("edge references an invalid node pair");
        }
        if (!(e.length > 0.0) ||
            std::abs(e.length - planar_distance(nodes_[e.a], nodes_[e.b])) > kEdgeLengthTolerance) {
            throw RoutingError(text::format("edge %u-%u length does not match its endpoints", e.a, e.b));
        }
    }
    if (!is_connected(nodes_.size(), edges_)) {
        throw RoutingError("road network is not connected");
    }
    adjacency_ = build_adjacency(nodes_.size(), edges_);
}

std::optional<std::size_t> RoadNetwork::find_edge(NodeId a, NodeId b) const {
    for (const Adjacent& e : adjacency_.at(a)) {
        if (e.node == b) {
            return e.edge;
        }
    }
    return std::nullopt;
}

NodeId RoadNetwork::nearest_node(GeoPoint p) const {
    if (nodes_.empty()) {
        throw RoutingError("nearest_node on an empty network");
    }
    NodeId best = 0;
    double best_d = INFINITY;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const double d = planar_distance(p, nodes_[i]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<NodeId>(i);
        }
    }
    return best;
}

std::vector<double> RoadNetwork::distances_from(NodeId source) const {
    std::vector<double> dist(nodes_.size(), INFINITY);
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist.at(source) = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) {
            continue;
        }
        for (const Adjacent& e : adjacency_[u]) {
            const double nd = d + edges_[e.edge].length;
            if (nd < dist[e.node]) {
                dist[e.node] = nd;
                heap.push({nd, e.node});
            }
        }
    }
    return dist;
}

RoadNetwork generate_network(const NetworkParams& p) {
    if (p.width < 3 || p.height < 3) {
        throw RoutingError("network lattice must be at least 3x3");
    }
    if (!(p.knockout_fraction >= 0.0 && p.knockout_fraction <= 0.3)) {
        throw RoutingError("knockout_fraction must lie in [0, 0.3]");
    }
    if (!(p.spacing > 0.0)) {
        throw RoutingError("lattice spacing must be positive");
    }
    if (!(p.jitter >= 0.0 && p.jitter < p.spacing / 2.0)) {
        throw RoutingError("jitter must lie in [0, spacing/2)");
    }

    Rng rng(derive_seed(p.seed, "network"));
    const auto w = static_cast<NodeId>(p.width);
    const auto h = static_cast<NodeId>(p.height);
    std::vector<GeoPoint> nodes;
    nodes.reserve(static_cast<std::size_t>(w) * h);
    for (NodeId row = 0; row < h; ++row) {
        for (NodeId col = 0; col < w; ++col) {
            GeoPoint q{col * p.spacing, row * p.spacing};
            if (p.jitter > 0.0) {
                q.x += rng.uniform(-p.jitter, p.jitter);
                q.y += rng.uniform(-p.jitter, p.jitter);
            }
            nodes.push_back(q);
        }
    }

    std::vector<Edge> edges;
    auto add = [&](NodeId a, NodeId b, std::string street) {
        edges.push_back({a, b, planar_distance(nodes[a], nodes[b]), std::move(street)});
    };
    for (NodeId row = 0; row < h; ++row) {
        for (NodeId col = 0; col < w; ++col) {
            const NodeId id = row * w + col;
            if (col + 1 < w) {
                add(id, id + 1, "R" + std::to_string(row));
            }
            if (row + 1 < h) {
                add(id, id + w, "C" + std::to_string(col));
            }
        }
    }

    const auto target = static_cast<std::size_t>(std::llround(p.knockout_fraction * edges.size()));
    if (target > 0) {
        auto on_boundary = [&](NodeId id) {
            const NodeId row = id / w;
            const NodeId col = id % w;
            return row == 0 || col == 0 || row + 1 == h || col + 1 == w;
        };
        std::vector<int> degree(nodes.size(), 0);
        for (const Edge& e : edges) {
            ++degree[e.a];
            ++degree[e.b];
        }
        std::vector<std::size_t> order(edges.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        rng.shuffle(order);
        std::vector<char> removed(edges.size(), 0);
        std::size_t count = 0;
        for (std::size_t idx : order) {
            if (count == target) {
                break;
            }
            const Edge& e = edges[idx];
            if ((!on_boundary(e.a) && degree[e.a] <= 2) || (!on_boundary(e.b) && degree[e.b] <= 2)) {
                continue;
            }
            removed[idx] = 1;
            std::vector<Edge> kept;
            kept.reserve(edges.size());
            for (std::size_t i = 0; i < edges.size(); ++i) {
                if (!removed[i]) {
                    kept.push_back(edges[i]);
                }
            }
            if (!is_connected(nodes.size(), kept)) {
                removed[idx] = 0;
                continue;
            }
            --degree[e.a];
            --degree[e.b];
            ++count;
        }
        if (count < target) {
            throw RoutingError("knockout_fraction cannot be met without disconnecting the network");
        }
        std::vector<Edge> kept;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (!removed[i]) {
                kept.push_back(std::move(edges[i]));
            }
        }
        edges = std::move(kept);
    }
    return RoadNetwork(std::move(nodes), std::move(edges), p.seed, p.width, p.height);
}

NodePath shortest_node_path(const RoadNetwork& net, NodeId a, NodeId b) {
    if (!net.contains(a) || !net.contains(b)) {
        throw RoutingError("shortest_path endpoint is not a network node");
    }
    NodePath path;
    path.nodes.push_back(a);
    if (a == b) {
        return path;
    }
    // Distances to the target; then walk greedily from the source choosing the
    // smallest neighbor id that stays on some shortest path.
    const std::vector<double> to_target = net.distances_from(b);
    if (!std::isfinite(to_target[a])) {
        throw RoutingError(text::format("node %u is unreachable from node %u", b, a));
    }
    NodeId u = a;
    while (u != b) {
        bool advanced = false;
        for (const Adjacent& e : net.neighbors(u)) {
            const double w = net.edges()[e.edge].length;
            if (nearly_equal(w + to_target[e.node], to_target[u])) {
                path.length += w;
                path.nodes.push_back(e.node);
                u = e.node;
                advanced = true;
                break;
            }
        }
        if (!advanced) {
            throw RoutingError("shortest path reconstruction failed");
        }
    }
    return path;
}

Polyline shortest_path(const RoadNetwork& net, NodeId a, NodeId b) {
    const NodePath path = shortest_node_path(net, a, b);
    Polyline line;
    for (NodeId id : path.nodes) {
        line.points.push_back(net.node(id));
    }
    return line;
}

Polyline densify(const RoadNetwork& net, std::span<const NodeId> path, double spacing) {
    if (!(spacing > 0.0)) {
        throw RoutingError("densification spacing must be positive");
    }
    Polyline line;
    if (path.empty()) {
        return line;
    }
    line.points.push_back(net.node(path[0]));
    for (std::size_t i = 1; i < path.size(); ++i) {
        const GeoPoint from = net.node(path[i - 1]);
        const GeoPoint to = net.node(path[i]);
        const double len = planar_distance(from, to);
        const auto pieces = std::max<long long>(1, static_cast<long long>(std::ceil(len / spacing - 1e-9)));
        const Vec2 step = to - from;
        for (long long k = 1; k < pieces; ++k) {
            line.points.push_back(from + (static_cast<double>(k) / static_cast<double>(pieces)) * step);
        }
        line.points.push_back(to);
    }
    return line;
}

Polyline navigate(const RoadNetwork& net, NodeId a, NodeId b, double spacing) {
    const NodePath path = shortest_node_path(net, a, b);
    return densify(net, path.nodes, spacing);
}

PoiPair sample_poi_pair(const RoadNetwork& net, std::uint64_t seed, double min_dist) {
    if (net.node_count() < 2) {
        throw RoutingError("network has fewer than two nodes");
    }
    Rng rng(derive_seed(seed, "poi-pair"));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const auto a = static_cast<NodeId>(rng.index(net.node_count()));
        const auto b = static_cast<NodeId>(rng.index(net.node_count()));
        if (a == b) {
            continue;
        }
        if (min_dist > 0.0 && net.distances_from(a)[b] < min_dist) {
            continue;
        }
        return {a, b, net.node(a), net.node(b)};
    }
    throw RoutingError(text::format("no node pair at network distance >= %.1f m after 1000 draws", min_dist));
}

const char* maneuver_name(Maneuver m) noexcept {
    switch (m) {
    case Maneuver::left:
        return "left";
    case Maneuver::right:
        return "right";
    case Maneuver::straight:
        return "straight";
    case Maneuver::arrive:
        return "arrive";
    }
    return "arrive";
}

std::size_t Route::instruction_at(std::size_t geo_index) const {
    for (std::size_t i = 0; i < instructions.size(); ++i) {
        if (geo_index < instructions[i].geo_end || i + 1 == instructions.size()) {
            return i;
        }
    }
    return 0;
}

Route plan_route(const RoadNetwork& net, const PoiPair& pair, const PlanOptions& options) {
    if (pair.start_node == pair.end_node) {
        throw RoutingError("route endpoints coincide");
    }
    const NodePath path = shortest_node_path(net, pair.start_node, pair.end_node);

    Route route;
    route.start_node = pair.start_node;
    route.end_node = pair.end_node;
    route.nodes = path.nodes;
    route.geo = densify(net, path.nodes, options.spacing);

    // Geo index of every path node, found by replaying the densification count.
    route.node_geo_index.push_back(0);
    for (std::size_t i = 1; i < path.nodes.size(); ++i) {
        const double len = planar_distance(net.node(path.nodes[i - 1]), net.node(path.nodes[i]));
        const auto pieces =
            std::max<long long>(1, static_cast<long long>(std::ceil(len / options.spacing - 1e-9)));
        route.node_geo_index.push_back(route.node_geo_index.back() + static_cast<std::size_t>(pieces));
    }

    auto edge_between = [&](std::size_t i) -> const Edge& {
        return net.edges()[*net.find_edge(path.nodes[i], path.nodes[i + 1])];
    };

    std::size_t segment_begin = 0;
    std::size_t segment_first_edge = 0;
    double segment_length = 0.0;
    auto close_segment = [&](std::size_t end_node_index, Maneuver m) {
        Instruction ins;
        ins.street = edge_between(segment_first_edge).street;
        ins.maneuver = m;
        ins.length = segment_length;
        ins.geo_begin = segment_begin;
        ins.geo_end = route.node_geo_index[end_node_index];
        const long long rounded = std::llround(ins.length);
        if (m == Maneuver::arrive) {
            ins.text = text::format("continue on %s for %lld m, then arrive at the destination", ins.street.c_str(),
                                    rounded);
        } else {
            ins.text = text::format("continue on %s for %lld m, then turn %s at k_%zu", ins.street.c_str(), rounded,
                                    maneuver_name(m), route.intersections.size());
        }
        route.instructions.push_back(std::move(ins));
    };

    for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
        segment_length += edge_between(i).length;
        if (i + 2 == path.nodes.size()) {
            break;
        }
        const Edge& in = edge_between(i);
        const Edge& out = edge_between(i + 1);
        const Vec2 heading_in = net.node(path.nodes[i + 1]) - net.node(path.nodes[i]);
        const Vec2 heading_out = net.node(path.nodes[i + 2]) - net.node(path.nodes[i + 1]);
        const double turn = signed_angle_deg(heading_in, heading_out);
        const bool turning = std::abs(turn) > options.turn_threshold;
        if (!turning && in.street == out.street) {
            continue;
        }
        route.intersections.push_back(route.node_geo_index[i + 1]);
        const Maneuver m = !turning ? Maneuver::straight : (turn > 0.0 ? Maneuver::left : Maneuver::right);
        close_segment(i + 1, m);
        segment_begin = route.node_geo_index[i + 1];
        segment_first_edge = i + 1;
        segment_length = 0.0;
    }
    close_segment(path.nodes.size() - 1, Maneuver::arrive);
    return route;
}

nlohmann::json to_json(const RoadNetwork& net) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const GeoPoint& q : net.nodes()) {
        nodes.push_back({q.x, q.y});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : net.edges()) {
        edges.push_back({{"a", e.a}, {"b", e.b}, {"length", e.length}, {"street", e.street}});
    }
    return {{"seed", net.seed()}, {"width", net.width()}, {"height", net.height()}, {"nodes", nodes},
            {"edges", edges}};
}

RoadNetwork network_from_json(const nlohmann::json& j) {
    try {
        std::vector<GeoPoint> nodes;
        for (const auto& q : j.at("nodes")) {
            nodes.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
        }
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            edges.push_back({e.at("a").get<NodeId>(), e.at("b").get<NodeId>(), e.at("length").get<double>(),
                             e.value("street", std::string{})});
        }
        return RoadNetwork(std::move(nodes), std::move(edges), j.value("seed", std::uint64_t{0}),
                           j.value("width", 0), j.value("height", 0));
    } catch (const nlohmann::json::exception& ex) {
        throw RoutingError(std::string("malformed network document: ") + ex.what());
    }
}

} // namespace disputekit
