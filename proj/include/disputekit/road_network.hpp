// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/geo.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace disputekit {

using NodeId = std::uint32_t;

struct Edge {
    NodeId a = 0;
    NodeId b = 0;
    double length = 0.0;
    std::string street;
};

struct Adjacent {
    NodeId node = 0;
    std::size_t edge = 0;
};

/// Undirected road graph with planar node coordinates. Immutable once built.
class RoadNetwork {
public:
    RoadNetwork() = default;

    /// Validates ids, edge lengths (must equal endpoint distance within 1e-6)
    /// and connectivity. `width`/`height` describe the lattice it was grown
    /// from, or 0 for free-form graphs.
    RoadNetwork(std::vector<GeoPoint> nodes, std::vector<Edge> edges, std::uint64_t seed = 0,
                int width = 0, int height = 0);

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const GeoPoint& node(NodeId id) const { return nodes_.at(id); }
    const std::vector<GeoPoint>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::span<const Adjacent> neighbors(NodeId id) const { return adjacency_.at(id); }
    std::uint64_t seed() const noexcept { return seed_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    std::optional<std::size_t> find_edge(NodeId a, NodeId b) const;

    /// Node closest to `p`; ties go to the smaller id.
    NodeId nearest_node(GeoPoint p) const;

    /// Single-source shortest-path distances (INFINITY where unreachable).
    std::vector<double> distances_from(NodeId source) const;

    bool contains(NodeId id) const noexcept { return id < nodes_.size(); }

private:
    std::vector<GeoPoint> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Adjacent>> adjacency_;
    std::uint64_t seed_ = 0;
    int width_ = 0;
    int height_ = 0;
};

bool is_connected(std::size_t node_count, std::span<const Edge> edges);

struct NetworkParams {
    std::uint64_t seed = 1;
    int width = 10;
    int height = 10;
    double jitter = 0.0;            // meters, uniform in [-jitter, jitter] per axis
    double knockout_fraction = 0.0; // share of lattice edges removed
    double spacing = 100.0;         // lattice pitch in meters
};

/// Perturbed lattice with random edge knockout. Row streets are tagged
/// "R<row>", column streets "C<col>".
RoadNetwork generate_network(const NetworkParams& params);

/// Node sequence of a shortest path plus its length.
struct NodePath {
    std::vector<NodeId> nodes;
    double length = 0.0;
};

/// Minimum-length path; among equal-length paths the lexicographically
/// smallest node-id sequence. Throws RoutingError if `b` is unreachable.
NodePath shortest_node_path(const RoadNetwork& net, NodeId a, NodeId b);

/// Coordinates of `shortest_node_path`. a == b yields a single point.
Polyline shortest_path(const RoadNetwork& net, NodeId a, NodeId b);

/// Coordinates of a node path with every edge subdivided so consecutive
/// points are at most `spacing` meters apart. Node coordinates are kept exactly.
Polyline densify(const RoadNetwork& net, std::span<const NodeId> path, double spacing);

/// Navigation oracle: densified shortest path between two nodes.
Polyline navigate(const RoadNetwork& net, NodeId a, NodeId b, double spacing = 10.0);

struct PoiPair {
    NodeId start_node = 0;
    NodeId end_node = 0;
    GeoPoint start;
    GeoPoint end;
};

/// Uniform node pair with network distance >= min_dist. Gives up with a
/// RoutingError after 1000 draws.
PoiPair sample_poi_pair(const RoadNetwork& net, std::uint64_t seed, double min_dist = 500.0);

enum class Maneuver { left, right, straight, arrive };

const char* maneuver_name(Maneuver m) noexcept;

struct Instruction {
    std::string street;
    Maneuver maneuver = Maneuver::arrive;
    double length = 0.0;
    std::size_t geo_begin = 0; // index into Route::geo where the segment starts
    std::size_t geo_end = 0;   // index where it ends (an intersection or the destination)
    std::string text;
};

/// Planned route: the dense geometric backbone plus the instruction list.
/// Instruction i covers geo indices [geo_begin, geo_end].
struct Route {
    Polyline geo;
    std::vector<std::size_t> intersections; // geo indices of the k_m
    std::vector<Instruction> instructions;  // intersections.size() + 1 entries
    std::vector<NodeId> nodes;              // underlying node path
    std::vector<std::size_t> node_geo_index;
    NodeId start_node = 0;
    NodeId end_node = 0;

    std::size_t turn_count() const noexcept { return intersections.size(); }

    /// Instruction whose segment contains `geo_index`; an intersection belongs
    /// to the segment leaving it.
    std::size_t instruction_at(std::size_t geo_index) const;
};

struct PlanOptions {
    double spacing = 10.0;        // max distance between dense points
    double turn_threshold = 30.0; // degrees of heading change that make a node an intersection
};

Route plan_route(const RoadNetwork& net, const PoiPair& pair, const PlanOptions& options = {});

nlohmann::json to_json(const RoadNetwork& net);
RoadNetwork network_from_json(const nlohmann::json& j);

} // namespace disputekit
