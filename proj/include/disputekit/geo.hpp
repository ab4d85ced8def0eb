// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Planar geometry in local tangent-plane meters (x east, y north).

#include <span>
#include <vector>

namespace disputekit {

/// Displacement in meters.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

/// Location in meters east/north of the local origin.
struct GeoPoint {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator-(GeoPoint a, GeoPoint b) { return {a.x - b.x, a.y - b.y}; }
    friend GeoPoint operator+(GeoPoint p, Vec2 v) { return {p.x + v.x, p.y + v.y}; }
    friend bool operator==(GeoPoint, GeoPoint) = default;
};

/// Largest coordinate magnitude accepted as a valid GeoPoint.
inline constexpr double kMaxCoordinate = 1e7;

bool is_valid(GeoPoint p) noexcept;

double norm(Vec2 v) noexcept;
double dot(Vec2 a, Vec2 b) noexcept;
double cross(Vec2 a, Vec2 b) noexcept;

/// Counterclockwise rotation by `degrees`.
Vec2 rotate_vector(Vec2 v, double degrees) noexcept;

/// Signed angle in degrees from `a` to `b`, in (-180, 180].
double signed_angle_deg(Vec2 a, Vec2 b) noexcept;

double planar_distance(GeoPoint a, GeoPoint b) noexcept;

/// Ordered point sequence. A well-formed polyline (see `validate_polyline`)
/// has at least two points, no repeated consecutive points and positive
/// length; the degenerate single-point path between identical endpoints is
/// representable so routing can return it.
struct Polyline {
    std::vector<GeoPoint> points;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    const GeoPoint& front() const { return points.front(); }
    const GeoPoint& back() const { return points.back(); }
    const GeoPoint& operator[](std::size_t i) const { return points[i]; }

    friend bool operator==(const Polyline&, const Polyline&) = default;
};

/// Throws GeoError if `p` breaks the polyline invariants.
void validate_polyline(const Polyline& p);

double polyline_length(const Polyline& p) noexcept;

/// Arc-length prefix of `p` of length min(delta, length(p)). The last point
/// is interpolated on the cut segment. Throws GeoError for delta <= 0.
Polyline truncate_polyline(const Polyline& p, double delta);

/// Distance from `q` to segment [a, b].
double point_segment_distance(GeoPoint q, GeoPoint a, GeoPoint b) noexcept;

/// Distance from `q` to the nearest point of `p`'s segments.
double point_polyline_distance(GeoPoint q, const Polyline& p) noexcept;

/// Axis-aligned bounding box.
struct BBox {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    double width() const noexcept { return max_x - min_x; }
    double height() const noexcept { return max_y - min_y; }
};

/// Bounding box over every point of every polyline. Requires at least one point.
BBox bounding_box(std::span<const Polyline* const> lines);

} // namespace disputekit
