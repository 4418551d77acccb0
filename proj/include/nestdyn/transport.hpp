// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nestdyn/error.hpp"
#include "nestdyn/geom.hpp"

namespace nestdyn {

enum class Component { outer, hole };

inline const char* to_string(Component c) { return c == Component::outer ? "outer" : "hole"; }

struct BoundaryRef {
    Component component = Component::outer;
    double param = 0.0;
};

// Region enclosed by a convex curve, optionally with a closed disc removed.
// The punctured form only exists to exercise the normal-property checker.
class Domain {
public:
    explicit Domain(BoundaryCurve outer) : outer_(std::move(outer)) {}
    Domain(BoundaryCurve outer, Vec2 hole_center, double hole_radius)
        : outer_(std::move(outer)), hole_(BoundaryCurve(CircleSpec{hole_center, hole_radius})) {
        if (!outer_.contains(hole_center)) throw Error(ErrorCode::invalid_shape, "hole centre outside domain");
    }

    const BoundaryCurve& outer() const { return outer_; }
    const std::optional<BoundaryCurve>& hole() const { return hole_; }
    bool punctured() const { return hole_.has_value(); }
    double diameter() const { return outer_.diameter(); }

    bool contains(Vec2 p) const {
        if (!outer_.contains(p)) return false;
        if (hole_) {
            const auto& h = std::get<CircleSpec>(hole_->spec());
            if (distance(p, h.center) <= h.radius) return false;
        }
        return true;
    }

    // positive inside, compared against the nearest boundary component
    double inside_margin(Vec2 p) const {
        double m = outer_.inside_margin(p);
        if (hole_) {
            const auto& h = std::get<CircleSpec>(hole_->spec());
            m = std::min(m, distance(p, h.center) - h.radius);
        }
        return m;
    }

    const BoundaryCurve& curve(Component c) const { return c == Component::outer ? outer_ : *hole_; }

    Vec2 point(const BoundaryRef& r) const { return curve(r.component).position(r.param); }

    Vec2 outward_normal(const BoundaryRef& r) const {
        Vec2 n = curve(r.component).outward_normal(r.param);
        return r.component == Component::outer ? n : -n;
    }

    Vec2 inward_normal(const BoundaryRef& r) const { return -outward_normal(r); }

    // curvature of the domain boundary as seen from inside (negative on the hole)
    double curvature(const BoundaryRef& r) const {
        double k = curve(r.component).curvature(r.param);
        return r.component == Component::outer ? k : -k;
    }

    // locate a point lying on the boundary
    BoundaryRef locate(Vec2 x, double tol = 1e-9) const {
        double t = outer_.polar_param(x - outer_.centroid());
        if (distance(outer_.position(t), x) <= tol * std::max(1.0, diameter())) return {Component::outer, t};
        if (hole_) {
            const auto& h = std::get<CircleSpec>(hole_->spec());
            Vec2 v = x - h.center;
            if (std::abs(norm(v) - h.radius) <= tol * std::max(1.0, diameter()))
                return {Component::hole, wrap_2pi(std::atan2(v.y, v.x))};
        }
        throw Error(ErrorCode::domain, "point is not on the domain boundary");
    }

private:
    BoundaryCurve outer_;
    std::optional<BoundaryCurve> hole_;
};

struct RayExit {
    double t_exit = 0.0;
    Vec2 hit{};
    BoundaryRef where{};
};

inline RayExit ray_exit(const Domain& om, Vec2 origin, Vec2 dir) {
    if (std::abs(norm(dir) - 1.0) > 1e-12) throw Error(ErrorCode::invalid_argument, "ray direction must be a unit vector");
    if (!om.contains(origin)) throw Error(ErrorCode::domain, "ray origin is not inside the domain");
    CurveHit out = exit_from_inside(om.outer(), origin, dir);
    RayExit r{out.distance, out.point, {Component::outer, out.param}};
    if (om.hole()) {
        if (auto h = first_hit(*om.hole(), origin, dir); h && h->distance < r.t_exit)
            r = {h->distance, h->point, {Component::hole, h->param}};
    }
    if (!std::isfinite(r.t_exit) || r.t_exit > 1e6 * om.diameter())
        throw Error(ErrorCode::unbounded_ray, "no exit within range");
    return r;
}

struct ThicknessSample {
    double t = 0.0;
    double d = 0.0;
    Vec2 hit{};
    BoundaryRef where{};
};

inline ThicknessSample thickness(const BoundaryCurve& c, const Domain& om, double t) {
    RayExit e = ray_exit(om, c.position(t), c.outward_normal(t));
    return {t, e.t_exit, e.hit, e.where};
}

struct RadialImage {
    Vec2 point{};
    double d = 0.0;
    BoundaryRef where{};
};

inline RadialImage radial_map(const BoundaryCurve& c, const Domain& om, double t) {
    ThicknessSample s = thickness(c, om, t);
    return {s.hit, s.d, s.where};
}

struct Projection {
    Vec2 point{};
    double param = 0.0;  // on the target curve
    double distance = 0.0;
    bool grazing = false;
};

inline Projection reciprocal_map(const Domain& om, const BoundaryCurve& target, const BoundaryRef& from) {
    Vec2 x = om.point(from);
    Vec2 n = om.inward_normal(from);
    auto h = first_hit(target, x, n);
    if (!h) throw Error(ErrorCode::no_intersection, "inward normal ray misses the target body");
    return {h->point, h->param, h->distance, h->grazing};
}

inline Projection reciprocal_map(const Domain& om, const BoundaryCurve& target, Vec2 x) {
    return reciprocal_map(om, target, om.locate(x));
}

// unsigned angle between the body normal at c and the domain normal at its radial image
inline double angular_variable(const BoundaryCurve& c, const Domain& om, double t) {
    RadialImage x = radial_map(c, om, t);
    Vec2 nu = c.outward_normal(t);
    Vec2 n = om.outward_normal(x.where);
    return std::atan2(std::abs(cross(nu, n)), dot(nu, n));
}

struct GnpViolation {
    std::string kind;       // disconnected_ray | inward_ray_misses | origin_outside
    Component component{};  // where the sample was taken on the domain, or outer for body samples
    bool on_body = false;
    double param = 0.0;
    Vec2 point{};
    double ray_param = 0.0;
};

struct GnpReport {
    bool pass = true;
    std::size_t samples = 0;
    std::vector<GnpViolation> violations;
};

inline GnpReport check_gnp(const BoundaryCurve& c, const Domain& om, std::size_t n) {
    if (n < 16) throw Error(ErrorCode::invalid_argument, "check_gnp needs at least 16 samples");
    GnpReport rep;
    rep.samples = n;
    const double span = om.diameter();
    constexpr int dense = 512;
    for (std::size_t i = 0; i < n; ++i) {
        double t = two_pi * static_cast<double>(i) / static_cast<double>(n);
        Vec2 o = c.position(t);
        Vec2 nu = c.outward_normal(t);
        RayExit e;
        try {
            e = ray_exit(om, o, nu);
        } catch (const Error&) {
            rep.violations.push_back({"origin_outside", Component::outer, true, t, o, 0.0});
            continue;
        }
        for (int j = 1; j <= dense; ++j) {
            double tau = e.t_exit + span * j / dense;
            if (om.contains(o + nu * tau)) {
                rep.violations.push_back({"disconnected_ray", Component::outer, true, t, o, tau});
                break;
            }
        }
    }
    auto inward = [&](Component comp) {
        for (std::size_t i = 0; i < n; ++i) {
            BoundaryRef r{comp, two_pi * static_cast<double>(i) / static_cast<double>(n)};
            Vec2 x = om.point(r);
            if (!first_hit(c, x, om.inward_normal(r)))
                rep.violations.push_back({"inward_ray_misses", comp, false, r.param, x, 0.0});
        }
    };
    inward(Component::outer);
    if (om.hole()) inward(Component::hole);
    rep.pass = rep.violations.empty();
    return rep;
}

// smallest inside margin of n boundary samples of c
inline double containment_margin(const BoundaryCurve& c, const Domain& om, std::size_t n = 512) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        m = std::min(m, om.inside_margin(c.position(two_pi * static_cast<double>(i) / static_cast<double>(n))));
    return m;
}

} // namespace nestdyn
