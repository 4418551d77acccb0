// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "nestdyn/scene.hpp"

namespace nestdyn {

struct ConcentricParams {
    double inner_radius = 1.0;
    double outer_radius = 2.0;
};

struct EccentricParams {
    double radius = 1.0;
    double domain_radius = 2.0;
    Vec2 domain_center{0.1, 0.0};
};

enum class DomainMode { fixed, co_scaled };

struct TangentCirclesParams {
    double lambda = 0.5;
    double domain_radius = 2.0;
    Vec2 domain_center{0.0, 0.0};
    DomainMode mode = DomainMode::fixed;
};

struct NestedEllipsesParams {
    double a = 2.0;
    double b = 1.0;
    double lambda = 0.5;
    double margin = 0.5;
};

struct StadiumParams {
    double radius = 1.0;
    double flat_length = 2.0;
    double smoothing = 0.05;
    double lambda = 0.5;
    double margin = 0.5;
};

struct RoundedTriangleParams {
    double height = 3.0;
    double corner_radius = 0.5;
    double smoothing = 0.02;
    double lambda = 0.5;
    double margin = 0.5;
};

// C_k identical unit circles inside a concentric disc: the identity dynamics
inline NestedScene concentric_scene(const ConcentricParams& p = {}) {
    return NestedScene("concentric", [p](std::size_t) {
        return Level{make_curve(CircleSpec{{0, 0}, p.inner_radius}), Domain(make_curve(CircleSpec{{0, 0}, p.outer_radius})),
                     {Anchor{0.0, false, "reference"}}};
    });
}

inline NestedScene eccentric_scene(const EccentricParams& p = {}) {
    return NestedScene("eccentric_circles", [p](std::size_t) {
        return Level{make_curve(CircleSpec{{0, 0}, p.radius}), Domain(make_curve(CircleSpec{p.domain_center, p.domain_radius})),
                     {Anchor{0.0, false, "axis"}}};
    });
}

// C_k of radius lambda^k, all internally tangent at p = (0, 1)
inline NestedScene tangent_circles_scene(const TangentCirclesParams& p = {}) {
    return NestedScene("tangent_circles", [p](std::size_t k) {
        const Vec2 tip{0.0, 1.0};
        double s = std::pow(p.lambda, static_cast<double>(k));
        BoundaryCurve body = make_curve(CircleSpec{{0.0, 1.0 - s}, s});
        CircleSpec om{p.domain_center, p.domain_radius};
        if (p.mode == DomainMode::co_scaled) om = CircleSpec{tip + (p.domain_center - tip) * s, p.domain_radius * s};
        return Level{std::move(body), Domain(make_curve(om)), {Anchor{std::numbers::pi / 2, true, "p"}}};
    });
}

// ellipses (a, lambda^k b) sharing the vertices (+-a, 0)
inline NestedScene nested_ellipses_scene(const NestedEllipsesParams& p = {}) {
    return NestedScene("nested_ellipses", [p](std::size_t k) {
        double b = p.b * std::pow(p.lambda, static_cast<double>(k));
        return Level{make_curve(EllipseSpec{{0, 0}, p.a, b}),
                     Domain(make_curve(EllipseSpec{{0, 0}, p.a + p.margin, p.b + p.margin})),
                     {Anchor{0.0, true, "right"}, Anchor{std::numbers::pi, true, "left"}}};
    });
}

// Stadium levels: arc radius shrinks by lambda while the tips stay put, so each
// level touches the next at both tips. Flats lengthen to compensate.
inline BoundaryCurve stadium_level_curve(const StadiumParams& p, std::size_t k) {
    double s = std::pow(p.lambda, static_cast<double>(k));
    double r = p.radius * s;
    double eps = p.smoothing * s;
    double target = make_curve(StadiumSpec{{0, 0}, p.radius, p.flat_length, p.smoothing}).position(0.0).x;
    double L = p.flat_length + 2.0 * (p.radius - r);
    BoundaryCurve c = make_curve(StadiumSpec{{0, 0}, r, L, eps});
    // smoothing moves the tip slightly; flats translate the arcs rigidly, so one correction is exact
    L += 2.0 * (target - c.position(0.0).x);
    return make_curve(StadiumSpec{{0, 0}, r, L, eps});
}

inline double stadium_flat_param(const BoundaryCurve& c) {
    const auto& s = std::get<StadiumSpec>(c.spec());
    double sigma = 0.5 * std::numbers::pi * s.radius + 0.5 * s.flat_length;
    return two_pi * sigma / c.perimeter();
}

inline NestedScene stadium_scene(const StadiumParams& p = {}) {
    return NestedScene("stadium", [p](std::size_t k) {
        BoundaryCurve c = stadium_level_curve(p, k);
        double flat = stadium_flat_param(c);
        Domain om(make_curve(StadiumSpec{{0, 0}, p.radius + p.margin, p.flat_length, p.smoothing}));
        return Level{std::move(c), std::move(om),
                     {Anchor{0.0, true, "arc_right"}, Anchor{std::numbers::pi, true, "arc_left"},
                      Anchor{flat, false, "flat_top"}}};
    });
}

// Rounded triangles: corner radius shrinks by lambda, tips stay put (height adjusts).
inline BoundaryCurve triangle_level_curve(const RoundedTriangleParams& p, std::size_t k) {
    double s = std::pow(p.lambda, static_cast<double>(k));
    double R = p.corner_radius * s;
    double eps = p.smoothing * s;
    double target = make_curve(RoundedTriangleSpec{{0, 0}, p.height, p.corner_radius, p.smoothing}).position(0.0).x;
    double D = 2.0 * p.height / 3.0 - p.corner_radius;
    double H = 1.5 * (D + R);
    BoundaryCurve c = make_curve(RoundedTriangleSpec{{0, 0}, H, R, eps});
    H += 1.5 * (target - c.position(0.0).x);
    return make_curve(RoundedTriangleSpec{{0, 0}, H, R, eps});
}

inline NestedScene rounded_triangle_scene(const RoundedTriangleParams& p = {}) {
    double tip = make_curve(RoundedTriangleSpec{{0, 0}, p.height, p.corner_radius, p.smoothing}).position(0.0).x;
    return NestedScene("rounded_triangle", [p, tip](std::size_t k) {
        BoundaryCurve c = triangle_level_curve(p, k);
        Domain om(make_curve(CircleSpec{{0, 0}, tip + p.margin}));
        return Level{std::move(c), std::move(om),
                     {Anchor{0.0, true, "tip0"}, Anchor{two_pi / 3, true, "tip1"}, Anchor{2 * two_pi / 3, true, "tip2"}}};
    });
}

} // namespace nestdyn
