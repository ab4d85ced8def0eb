// SPDX-License-Identifier: Apache-2.0
#include "disputekit/mutation.hpp"

#include "disputekit/error.hpp"
#include "disputekit/rng.hpp"

#include <algorithm>
#include <cmath>

namespace disputekit {

namespace {

constexpr double kJunctionTolerance = 1e-6;
constexpr double kArrivalRadius = 1.0;
// A deviation waypoint must snap to a node at least this far from the plan,
// otherwise the "deviation" can retrace planned road and be indistinguishable.
constexpr double kMinExcursion = 20.0;
constexpr int kMaxResamples = 100;

Polyline history_until(const Route& route, std::size_t geo_index) {
    Polyline out;
    out.points.assign(route.geo.points.begin(), route.geo.points.begin() + static_cast<std::ptrdiff_t>(geo_index) + 1);
    return out;
}

NodeId node_at_geo_index(const Route& route, std::size_t geo_index) {
    const auto it = std::find(route.node_geo_index.begin(), route.node_geo_index.end(), geo_index);
    if (it == route.node_geo_index.end()) {
        throw MutationError("anchor index is not a route node");
    }
    return route.nodes[static_cast<std::size_t>(it - route.node_geo_index.begin())];
}

void require_intersection(const Route& route, std::size_t slot) {
    if (route.intersections.empty()) {
        throw MutationError("route has no interior intersection to anchor a mutation");
    }
    if (slot >= route.intersections.size()) {
        throw MutationError("anchor intersection out of range");
    }
}

Vec2 heading_after(const Route& route, std::size_t geo_index) {
    return route.geo[geo_index + 1] - route.geo[geo_index];
}

bool touches(const Polyline& line, GeoPoint q, double radius) {
    return std::any_of(line.points.begin(), line.points.end(),
                       [&](const GeoPoint& p) { return planar_distance(p, q) <= radius; });
}

} // namespace

const char* label_name(TrajectoryLabel label) noexcept {
    switch (label) {
    case TrajectoryLabel::compliant:
        return "compliant";
    case TrajectoryLabel::drift_only:
        return "drift_only";
    case TrajectoryLabel::unintentional_deviation:
        return "unintentional_deviation";
    case TrajectoryLabel::reverse_driving:
        return "reverse_driving";
    case TrajectoryLabel::arrival_then_leave:
        return "arrival_then_leave";
    }
    return "compliant";
}

std::optional<TrajectoryLabel> parse_trajectory_label(std::string_view name) {
    for (TrajectoryLabel l : kTrajectoryLabels) {
        if (name == label_name(l)) {
            return l;
        }
    }
    return std::nullopt;
}

void validate(const MutationConfig& cfg) {
    if (!(cfg.sigma >= 0.0)) {
        throw MutationError("sigma must be >= 0");
    }
    if (!(cfg.lambda_min > 0.0) || !(cfg.lambda_max >= cfg.lambda_min)) {
        throw MutationError("lambda range must be positive and ordered");
    }
    if (!(cfg.delta > 0.0)) {
        throw MutationError("delta must be > 0");
    }
    if (!(cfg.tau_thresh > 0.0)) {
        throw MutationError("tau_thresh must be > 0");
    }
    if (!(cfg.spacing > 0.0)) {
        throw MutationError("spacing must be > 0");
    }
}

Polyline stitch(const Polyline& prefix, const Polyline& suffix, bool allow_gap) {
    if (prefix.empty()) {
        return suffix;
    }
    if (suffix.empty()) {
        return prefix;
    }
    Polyline out = prefix;
    const bool joined = planar_distance(prefix.back(), suffix.front()) <= kJunctionTolerance;
    if (!joined && !allow_gap) {
        throw MutationError("stitch junction gap exceeds 1e-6 m");
    }
    out.points.insert(out.points.end(), suffix.points.begin() + (joined ? 1 : 0), suffix.points.end());
    return out;
}

GeoPoint rotated_waypoint(GeoPoint anchor, Vec2 heading, double degrees, double lambda) {
    const double n = norm(heading);
    if (!(n > 0.0)) {
        throw MutationError("zero-length heading vector");
    }
    const Vec2 unit{heading.x / n, heading.y / n};
    return anchor + lambda * rotate_vector(unit, degrees);
}

LabeledTrajectory apply_drift(LabeledTrajectory traj, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) {
        throw MutationError("sigma must be >= 0");
    }
    Rng rng(derive_seed(seed, "drift"));
    if (sigma > 0.0) {
        for (GeoPoint& q : traj.path.points) {
            q.x += sigma * rng.normal();
            q.y += sigma * rng.normal();
        }
    }
    traj.provenance.sigma = sigma;
    return traj;
}

LabeledTrajectory synthesize_compliant(const Route& route, const MutationConfig& cfg) {
    validate(cfg);
    if (cfg.sigma > 30.0) {
        throw MutationError("sigma must lie in [0, 30] m");
    }
    LabeledTrajectory traj;
    traj.path = route.geo;
    traj.provenance.seed = cfg.seed;
    traj.label = (cfg.sigma > 0.0 && cfg.tag_drift) ? TrajectoryLabel::drift_only : TrajectoryLabel::compliant;
    return apply_drift(std::move(traj), cfg.sigma, cfg.seed);
}

LabeledTrajectory mutate_deviation(const Route& route, const RoadNetwork& net, const DeviationChoice& choice,
                                   const MutationConfig& cfg) {
    validate(cfg);
    require_intersection(route, choice.intersection);
    const std::size_t idx = route.intersections[choice.intersection];
    const NodeId anchor = node_at_geo_index(route, idx);
    const GeoPoint waypoint = rotated_waypoint(route.geo[idx], heading_after(route, idx), choice.theta_deg, choice.lambda);
    const NodeId target = net.nearest_node(waypoint);
    if (target == anchor) {
        throw MutationError("deviation waypoint snaps back onto the anchor");
    }

    LabeledTrajectory traj;
    traj.label = TrajectoryLabel::unintentional_deviation;
    const Polyline excursion = navigate(net, anchor, target, cfg.spacing);
    const Polyline recovery = navigate(net, target, route.end_node, cfg.spacing);
    traj.path = stitch(stitch(history_until(route, idx), excursion), recovery);

    Provenance& p = traj.provenance;
    p.seed = cfg.seed;
    p.anchor_index = idx;
    p.anchor_intersection = choice.intersection + 1;
    p.anchor_node = anchor;
    p.theta_deg = choice.theta_deg;
    p.lambda = choice.lambda;
    p.waypoint = waypoint;
    p.target_node = target;
    return traj;
}

LabeledTrajectory mutate_deviation(const Route& route, const RoadNetwork& net, const MutationConfig& cfg) {
    validate(cfg);
    require_intersection(route, 0);
    Rng rng(derive_seed(cfg.seed, "deviation"));
    for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
        DeviationChoice choice;
        choice.intersection = rng.index(route.intersections.size());
        choice.theta_deg = rng.index(2) == 0 ? 90.0 : 270.0;
        choice.lambda = rng.uniform(cfg.lambda_min, cfg.lambda_max);
        const std::size_t idx = route.intersections[choice.intersection];
        const GeoPoint waypoint =
            rotated_waypoint(route.geo[idx], heading_after(route, idx), choice.theta_deg, choice.lambda);
        const NodeId target = net.nearest_node(waypoint);
        if (target == node_at_geo_index(route, idx) ||
            point_polyline_distance(net.node(target), route.geo) < kMinExcursion) {
            continue;
        }
        return mutate_deviation(route, net, choice, cfg);
    }
    throw MutationError("no off-route deviation waypoint found after 100 draws");
}

LabeledTrajectory mutate_reverse(const Route& route, const RoadNetwork& net, const ReverseChoice& choice,
                                 const MutationConfig& cfg) {
    validate(cfg);
    require_intersection(route, choice.intersection);
    const std::size_t idx = route.intersections[choice.intersection];
    const NodeId anchor = node_at_geo_index(route, idx);
    const GeoPoint waypoint = rotated_waypoint(route.geo[idx], heading_after(route, idx), choice.phi_deg, choice.lambda);
    const NodeId target = net.nearest_node(waypoint);
    if (target == anchor) {
        throw MutationError("reverse waypoint snaps back onto the anchor");
    }

    LabeledTrajectory traj;
    traj.label = TrajectoryLabel::reverse_driving;
    const Polyline leg = truncate_polyline(navigate(net, anchor, target, cfg.spacing), cfg.delta);
    traj.path = stitch(history_until(route, idx), leg);

    Provenance& p = traj.provenance;
    p.seed = cfg.seed;
    p.anchor_index = idx;
    p.anchor_intersection = choice.intersection + 1;
    p.anchor_node = anchor;
    p.phi_deg = choice.phi_deg;
    p.lambda = choice.lambda;
    p.waypoint = waypoint;
    p.target_node = target;
    p.delta = cfg.delta;
    return traj;
}

LabeledTrajectory mutate_reverse(const Route& route, const RoadNetwork& net, const MutationConfig& cfg) {
    validate(cfg);
    require_intersection(route, 0);
    Rng rng(derive_seed(cfg.seed, "reverse"));
    const GeoPoint destination = net.node(route.end_node);
    for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
        ReverseChoice choice;
        choice.intersection = rng.index(route.intersections.size());
        choice.phi_deg = rng.uniform(150.0, 210.0);
        choice.lambda = rng.uniform(cfg.lambda_min, cfg.lambda_max);
        const std::size_t idx = route.intersections[choice.intersection];
        const NodeId anchor = node_at_geo_index(route, idx);
        const GeoPoint waypoint =
            rotated_waypoint(route.geo[idx], heading_after(route, idx), choice.phi_deg, choice.lambda);
        const NodeId target = net.nearest_node(waypoint);
        if (target == anchor) {
            continue;
        }
        // A reverse leg that reaches the destination would read as a completed trip.
        if (touches(truncate_polyline(navigate(net, anchor, target, cfg.spacing), cfg.delta), destination,
                    kArrivalRadius)) {
            continue;
        }
        return mutate_reverse(route, net, choice, cfg);
    }
    throw MutationError("no usable reverse waypoint found after 100 draws");
}

LabeledTrajectory mutate_arrival_then_leave(const Route& route, const RoadNetwork& net, const MutationConfig& cfg) {
    validate(cfg);
    const GeoPoint destination = net.node(route.end_node);
    std::vector<NodeId> qualifying;
    for (NodeId id = 0; id < net.node_count(); ++id) {
        if (planar_distance(destination, net.node(id)) > cfg.tau_thresh) {
            qualifying.push_back(id);
        }
    }
    if (qualifying.empty()) {
        throw MutationError("no escape node farther than tau_thresh from the destination");
    }
    Rng rng(derive_seed(cfg.seed, "arrival-then-leave"));
    const NodeId target = qualifying[rng.index(qualifying.size())];

    LabeledTrajectory traj;
    traj.label = TrajectoryLabel::arrival_then_leave;
    traj.path = stitch(route.geo, navigate(net, route.end_node, target, cfg.spacing));
    traj.provenance.seed = cfg.seed;
    traj.provenance.target_node = target;
    traj.provenance.escape_distance = planar_distance(destination, net.node(target));
    return traj;
}

LabeledTrajectory synthesize(TrajectoryLabel label, const Route& route, const RoadNetwork& net,
                             const MutationConfig& cfg) {
    LabeledTrajectory traj;
    switch (label) {
    case TrajectoryLabel::compliant: {
        MutationConfig quiet = cfg;
        quiet.sigma = 0.0;
        return synthesize_compliant(route, quiet);
    }
    case TrajectoryLabel::drift_only: {
        if (!(cfg.sigma > 0.0)) {
            throw MutationError("drift_only needs sigma > 0");
        }
        MutationConfig tagged = cfg;
        tagged.tag_drift = true;
        return synthesize_compliant(route, tagged);
    }
    case TrajectoryLabel::unintentional_deviation:
        traj = mutate_deviation(route, net, cfg);
        break;
    case TrajectoryLabel::reverse_driving:
        traj = mutate_reverse(route, net, cfg);
        break;
    case TrajectoryLabel::arrival_then_leave:
        traj = mutate_arrival_then_leave(route, net, cfg);
        break;
    }
    if (cfg.drift_violations && cfg.sigma > 0.0) {
        traj = apply_drift(std::move(traj), cfg.sigma, cfg.seed);
    }
    return traj;
}

TrajectoryStats trajectory_stats(const Route& route, const Polyline& path) {
    TrajectoryStats s;
    if (path.empty()) {
        return s;
    }
    const GeoPoint destination = route.geo.back();
    s.length = polyline_length(path);
    s.detour = s.length - polyline_length(route.geo);
    s.reaches_destination = planar_distance(path.back(), destination) <= kArrivalRadius;
    for (const GeoPoint& q : path.points) {
        s.max_offset = std::max(s.max_offset, point_polyline_distance(q, route.geo));
    }
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (planar_distance(path[i], destination) <= kArrivalRadius) {
            for (std::size_t k = i + 1; k < path.size(); ++k) {
                s.post_arrival_travel += planar_distance(path[k - 1], path[k]);
            }
            break;
        }
    }
    return s;
}

nlohmann::json to_json(const Provenance& p) {
    nlohmann::json j{{"seed", p.seed}};
    if (p.anchor_index) j["anchor_index"] = *p.anchor_index;
    if (p.anchor_intersection) j["anchor_intersection"] = *p.anchor_intersection;
    if (p.anchor_node) j["anchor_node"] = *p.anchor_node;
    if (p.theta_deg) j["theta_deg"] = *p.theta_deg;
    if (p.phi_deg) j["phi_deg"] = *p.phi_deg;
    if (p.lambda) j["lambda"] = *p.lambda;
    if (p.waypoint) j["waypoint"] = {p.waypoint->x, p.waypoint->y};
    if (p.target_node) j["target_node"] = *p.target_node;
    if (p.delta) j["delta"] = *p.delta;
    if (p.escape_distance) j["escape_distance"] = *p.escape_distance;
    if (p.sigma) j["sigma"] = *p.sigma;
    return j;
}

Provenance provenance_from_json(const nlohmann::json& j) {
    Provenance p;
    p.seed = j.value("seed", std::uint64_t{0});
    auto opt = [&]<typename T>(const char* key, std::optional<T>& out) {
        if (j.contains(key)) {
            out = j.at(key).get<T>();
        }
    };
    opt("anchor_index", p.anchor_index);
    opt("anchor_intersection", p.anchor_intersection);
    opt("anchor_node", p.anchor_node);
    opt("theta_deg", p.theta_deg);
    opt("phi_deg", p.phi_deg);
    opt("lambda", p.lambda);
    if (j.contains("waypoint")) {
        p.waypoint = GeoPoint{j["waypoint"].at(0).get<double>(), j["waypoint"].at(1).get<double>()};
    }
    opt("target_node", p.target_node);
    opt("delta", p.delta);
    opt("escape_distance", p.escape_distance);
    opt("sigma", p.sigma);
    return p;
}

nlohmann::json to_json(const LabeledTrajectory& t) {
    nlohmann::json path = nlohmann::json::array();
    for (const GeoPoint& q : t.path.points) {
        path.push_back({q.x, q.y});
    }
    return {{"label", label_name(t.label)}, {"path", path}, {"provenance", to_json(t.provenance)}};
}

LabeledTrajectory trajectory_from_json(const nlohmann::json& j) {
    try {
        LabeledTrajectory t;
        const auto label = parse_trajectory_label(j.at("label").get<std::string>());
        if (!label) {
            throw MutationError("unknown trajectory label");
        }
        t.label = *label;
        for (const auto& q : j.at("path")) {
            t.path.points.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
        }
        t.provenance = provenance_from_json(j.value("provenance", nlohmann::json::object()));
        return t;
    } catch (const nlohmann::json::exception& ex) {
        throw MutationError(std::string("malformed trajectory record: ") + ex.what());
    }
}

} // namespace disputekit
