// SPDX-License-Identifier: Apache-2.0
#include "disputekit/geo.hpp"

#include "disputekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace disputekit {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

bool is_valid(GeoPoint p) noexcept {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::abs(p.x) < kMaxCoordinate &&
           std::abs(p.y) < kMaxCoordinate;
}

double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }
double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }

Vec2 rotate_vector(Vec2 v, double degrees) noexcept {
    // Exact values at the quarter turns keep axis rotations free of 1e-17 residue.
    const double r = std::fmod(degrees, 360.0);
    const double t = r < 0.0 ? r + 360.0 : r;
    double c = 0.0;
    double s = 0.0;
    if (t == 0.0) {
        c = 1.0;
    } else if (t == 90.0) {
        s = 1.0;
    } else if (t == 180.0) {
        c = -1.0;
    } else if (t == 270.0) {
        s = -1.0;
    } else {
        c = std::cos(t * kDegToRad);
        s = std::sin(t * kDegToRad);
    }
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

double signed_angle_deg(Vec2 a, Vec2 b) noexcept {
    return std::atan2(cross(a, b), dot(a, b)) / kDegToRad;
}

double planar_distance(GeoPoint a, GeoPoint b) noexcept { return norm(b - a); }

void validate_polyline(const Polyline& p) {
    if (p.size() < 2) {
        throw GeoError("polyline needs at least 2 points");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!is_valid(p[i])) {
            throw GeoError("polyline point " + std::to_string(i) + " is not finite or out of range");
        }
        if (i > 0 && p[i] == p[i - 1]) {
            throw GeoError("polyline repeats point " + std::to_string(i));
        }
    }
    if (!(polyline_length(p) > 0.0)) {
        throw GeoError("polyline has zero length");
    }
}

double polyline_length(const Polyline& p) noexcept {
    double total = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        total += planar_distance(p[i - 1], p[i]);
    }
    return total;
}

Polyline truncate_polyline(const Polyline& p, double delta) {
    if (!(delta > 0.0)) {
        throw GeoError("truncation distance must be positive");
    }
    Polyline out;
    if (p.empty()) {
        return out;
    }
    out.points.push_back(p[0]);
    double walked = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        const double seg = planar_distance(p[i - 1], p[i]);
        if (walked + seg < delta) {
            out.points.push_back(p[i]);
            walked += seg;
            continue;
        }
        const double remaining = delta - walked;
        if (remaining >= seg) {
            out.points.push_back(p[i]);
        } else if (remaining > 0.0) {
            const double t = remaining / seg;
            const Vec2 step = p[i] - p[i - 1];
            out.points.push_back(p[i - 1] + t * step);
        }
        return out;
    }
    return out;
}

double point_segment_distance(GeoPoint q, GeoPoint a, GeoPoint b) noexcept {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) {
        return planar_distance(q, a);
    }
    const double t = std::clamp(dot(q - a, ab) / len2, 0.0, 1.0);
    return planar_distance(q, a + t * ab);
}

double point_polyline_distance(GeoPoint q, const Polyline& p) noexcept {
    if (p.size() == 1) {
        return planar_distance(q, p[0]);
    }
    double best = INFINITY;
    for (std::size_t i = 1; i < p.size(); ++i) {
        best = std::min(best, point_segment_distance(q, p[i - 1], p[i]));
    }
    return best;
}

BBox bounding_box(std::span<const Polyline* const> lines) {
    BBox box{INFINITY, INFINITY, -INFINITY, -INFINITY};
    bool any = false;
    for (const Polyline* line : lines) {
        for (const GeoPoint& q : line->points) {
            box.min_x = std::min(box.min_x, q.x);
            box.min_y = std::min(box.min_y, q.y);
            box.max_x = std::max(box.max_x, q.x);
            box.max_y = std::max(box.max_y, q.y);
            any = true;
        }
    }
    if (!any) {
        throw GeoError("bounding box of an empty point set");
    }
    return box;
}

} // namespace disputekit
