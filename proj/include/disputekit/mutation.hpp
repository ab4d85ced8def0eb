// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Behavioral trajectory simulation: turns a planned Route into an executed
/// path that is either compliant or carries one specific violation.

#include "disputekit/geo.hpp"
#include "disputekit/road_network.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace disputekit {

enum class TrajectoryLabel {
    compliant,
    drift_only,
    unintentional_deviation,
    reverse_driving,
    arrival_then_leave,
};

inline constexpr std::array<TrajectoryLabel, 5> kTrajectoryLabels{
    TrajectoryLabel::compliant,       TrajectoryLabel::drift_only,         TrajectoryLabel::unintentional_deviation,
    TrajectoryLabel::reverse_driving, TrajectoryLabel::arrival_then_leave,
};

const char* label_name(TrajectoryLabel label) noexcept;
std::optional<TrajectoryLabel> parse_trajectory_label(std::string_view name);

/// Parameters actually drawn while synthesizing a trajectory. Only the fields
/// the label uses are set.
struct Provenance {
    std::uint64_t seed = 0;
    std::optional<std::size_t> anchor_index;        // geo index of the anchor k_j
    std::optional<std::size_t> anchor_intersection; // j, 1-based
    std::optional<NodeId> anchor_node;
    std::optional<double> theta_deg; // deviation rotation
    std::optional<double> phi_deg;   // reverse rotation
    std::optional<double> lambda;    // waypoint distance from the anchor
    std::optional<GeoPoint> waypoint; // w_dev / w_rev before snapping
    std::optional<NodeId> target_node; // snapped waypoint or escape node
    std::optional<double> delta;       // reverse truncation limit
    std::optional<double> escape_distance;
    std::optional<double> sigma;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LabeledTrajectory {
    Polyline path;
    TrajectoryLabel label = TrajectoryLabel::compliant;
    Provenance provenance;
};

struct MutationConfig {
    double sigma = 12.0;        // drift noise, meters
    double lambda_min = 150.0;  // deviation / reverse waypoint distance range
    double lambda_max = 400.0;
    double delta = 300.0;       // reverse truncation
    double tau_thresh = 250.0;  // escape threshold
    std::uint64_t seed = 0;
    bool tag_drift = true;      // label noisy compliant paths drift_only
    bool drift_violations = false; // also perturb structural mutations
    double spacing = 10.0;      // densification of re-routed legs
};

/// Throws MutationError on out-of-range fields.
void validate(const MutationConfig& cfg);

/// prefix ⊕ suffix with the shared junction point emitted once. Without
/// allow_gap the junction must match within 1e-6 m.
Polyline stitch(const Polyline& prefix, const Polyline& suffix, bool allow_gap = false);

/// Off-route waypoint anchor + lambda * R_degrees(unit(heading)).
GeoPoint rotated_waypoint(GeoPoint anchor, Vec2 heading, double degrees, double lambda);

/// Route geometry with independent N(0, sigma^2 I) noise per point.
LabeledTrajectory synthesize_compliant(const Route& route, const MutationConfig& cfg);

/// Perturbs every point of `traj` by isotropic Gaussian noise; label kept.
LabeledTrajectory apply_drift(LabeledTrajectory traj, double sigma, std::uint64_t seed);

/// Explicit deviation parameters; the sampling overload draws these.
struct DeviationChoice {
    std::size_t intersection = 0; // index into route.intersections
    double theta_deg = 90.0;
    double lambda = 200.0;
};

struct ReverseChoice {
    std::size_t intersection = 0;
    double phi_deg = 180.0;
    double lambda = 200.0;
};

LabeledTrajectory mutate_deviation(const Route& route, const RoadNetwork& net, const DeviationChoice& choice,
                                   const MutationConfig& cfg);
LabeledTrajectory mutate_deviation(const Route& route, const RoadNetwork& net, const MutationConfig& cfg);

LabeledTrajectory mutate_reverse(const Route& route, const RoadNetwork& net, const ReverseChoice& choice,
                                 const MutationConfig& cfg);
LabeledTrajectory mutate_reverse(const Route& route, const RoadNetwork& net, const MutationConfig& cfg);

LabeledTrajectory mutate_arrival_then_leave(const Route& route, const RoadNetwork& net, const MutationConfig& cfg);

/// Dispatches on the requested label, applying drift to structural
/// mutations when cfg.drift_violations is set.
LabeledTrajectory synthesize(TrajectoryLabel label, const Route& route, const RoadNetwork& net,
                             const MutationConfig& cfg);

/// Geometric summary of an executed path against its plan.
struct TrajectoryStats {
    bool reaches_destination = false; // final point within 1 m of l_end
    double max_offset = 0.0;          // largest point distance from the planned geometry
    double post_arrival_travel = 0.0; // distance covered after first reaching l_end
    double length = 0.0;
    double detour = 0.0;              // length minus planned length
};

TrajectoryStats trajectory_stats(const Route& route, const Polyline& path);

nlohmann::json to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LabeledTrajectory& t);
LabeledTrajectory trajectory_from_json(const nlohmann::json& j);

} // namespace disputekit
