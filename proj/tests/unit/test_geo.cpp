// SPDX-License-Identifier: Apache-2.0
#include "disputekit/error.hpp"
#include "disputekit/geo.hpp"
#include "disputekit/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace disputekit;

namespace {
void check_vec(Vec2 got, Vec2 want, double tol = 1e-12) {
    CHECK(got.x == doctest::Approx(want.x).epsilon(tol));
    CHECK(got.y == doctest::Approx(want.y).epsilon(tol));
}
} // namespace

TEST_CASE("rotate_vector turns counterclockwise in degrees") {
    check_vec(rotate_vector({1, 0}, 90), {0, 1});
    check_vec(rotate_vector({1, 0}, 180), {-1, 0});
    // [[0,-1],[1,0]] * (3,4)
    check_vec(rotate_vector({3, 4}, 90), {-4, 3});
    check_vec(rotate_vector({1, 0}, 270), {0, -1});
    check_vec(rotate_vector({1, 0}, -90), {0, -1});
    check_vec(rotate_vector({2, 0}, 45), {std::sqrt(2.0), std::sqrt(2.0)});
}

TEST_CASE("rotation composes and preserves the norm") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Vec2 v{rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3)};
        const double a = rng.uniform(-720, 720);
        const double b = rng.uniform(-720, 720);
        const Vec2 twice = rotate_vector(rotate_vector(v, b), a);
        const Vec2 once = rotate_vector(v, a + b);
        CHECK(norm(twice - once) <= 1e-6);
        CHECK(std::abs(norm(rotate_vector(v, a)) - norm(v)) <= 1e-9 * norm(v));
    }
}

TEST_CASE("planar_distance") {
    CHECK(planar_distance({0, 0}, {0, 0}) == 0.0);
    CHECK(planar_distance({0, 0}, {3, 4}) == 5.0);
    CHECK(planar_distance({1, 1}, {4, 5}) == 5.0);

    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const GeoPoint a{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
        const GeoPoint b{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
        const GeoPoint c{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
        CHECK(planar_distance(a, b) == planar_distance(b, a));
        CHECK(planar_distance(a, c) <= planar_distance(a, b) + planar_distance(b, c) + 1e-9);
    }
}

TEST_CASE("polyline_length") {
    CHECK(polyline_length({{{0, 0}, {1, 0}}}) == 1.0);
    CHECK(polyline_length({{{0, 0}, {3, 0}, {3, 4}}}) == 7.0);
    CHECK(polyline_length({{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {0, 0}}}) == 8.0);
}

TEST_CASE("truncate_polyline") {
    const Polyline line{{{0, 0}, {10, 0}}};
    CHECK(truncate_polyline(line, 4) == Polyline{{{0, 0}, {4, 0}}});
    CHECK(truncate_polyline(line, 100) == line);
    CHECK(truncate_polyline(line, 10) == line);
    CHECK(truncate_polyline({{{0, 0}, {3, 0}, {3, 4}}}, 5) == Polyline{{{0, 0}, {3, 0}, {3, 2}}});
    CHECK(truncate_polyline({{{0, 0}, {3, 0}, {3, 4}}}, 3) == Polyline{{{0, 0}, {3, 0}}});

    CHECK_THROWS_AS(truncate_polyline(line, 0), GeoError);
    CHECK_THROWS_AS(truncate_polyline(line, -1), GeoError);
}

TEST_CASE("validate_polyline rejects malformed lines") {
    CHECK_NOTHROW(validate_polyline({{{0, 0}, {1, 0}}}));
    CHECK_THROWS_AS(validate_polyline({{{0, 0}}}), GeoError);
    CHECK_THROWS_AS(validate_polyline({{{0, 0}, {0, 0}}}), GeoError);
    CHECK_THROWS_AS(validate_polyline({{{0, 0}, {1, 0}, {1, 0}}}), GeoError);
    CHECK_THROWS_AS(validate_polyline({{{0, 0}, {NAN, 0}}}), GeoError);
    CHECK_THROWS_AS(validate_polyline({{{0, 0}, {2e7, 0}}}), GeoError);
}

TEST_CASE("point to polyline distance") {
    const Polyline l{{{0, 0}, {10, 0}, {10, 10}}};
    CHECK(point_polyline_distance({5, 3}, l) == doctest::Approx(3));
    CHECK(point_polyline_distance({13, 5}, l) == doctest::Approx(3));
    CHECK(point_polyline_distance({-3, -4}, l) == doctest::Approx(5));
}
