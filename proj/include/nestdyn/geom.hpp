// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nestdyn/error.hpp"
#include "nestdyn/roots.hpp"
#include "nestdyn/vec2.hpp"

namespace nestdyn {

enum class CurveKind { circle, ellipse, smoothed_stadium, rounded_triangle, conformal_series };

inline const char* to_string(CurveKind k) {
    switch (k) {
    case CurveKind::circle: return "circle";
    case CurveKind::ellipse: return "ellipse";
    case CurveKind::smoothed_stadium: return "smoothed_stadium";
    case CurveKind::rounded_triangle: return "rounded_triangle";
    case CurveKind::conformal_series: return "conformal_series";
    }
    return "?";
}

struct CircleSpec {
    Vec2 center{};
    double radius = 1.0;
};

// (a cos t, b sin t) + center
struct EllipseSpec {
    Vec2 center{};
    double a = 1.0;
    double b = 1.0;
};

// two half-discs of radius r joined by flats of length L; parameter 0 at the right tip
struct StadiumSpec {
    Vec2 center{};
    double radius = 1.0;
    double flat_length = 2.0;
    double smoothing = 0.05;
};

// equilateral triangle of height H with corners rounded to radius R; tips at 0, 120, 240 degrees
struct RoundedTriangleSpec {
    Vec2 center{};
    double height = 3.0;
    double corner_radius = 0.5;
    double smoothing = 0.02;
};

// image of the unit circle under phi(z) = sum a_n z^n
struct ConformalSpec {
    std::vector<std::complex<double>> coefficients{{0.0, 0.0}, {1.0, 0.0}};
};

using ShapeSpec = std::variant<CircleSpec, EllipseSpec, StadiumSpec, RoundedTriangleSpec, ConformalSpec>;

namespace detail {

struct CurvaturePiece {
    double length;
    double kappa;
};

inline double smoothstep5(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
// integral of smoothstep5 from 0 to x
inline double smoothstep5_int(double x) {
    double x2 = x * x;
    return x2 * x2 * (2.5 + x * (-3.0 + x));
}

// Closed curve of unit speed built from constant-curvature pieces; curvature is
// blended across each junction and the tangent angle integrated in closed form.
class ArcLinePath {
public:
    struct State {
        Vec2 pos;
        double psi;
        double kappa;
    };

    ArcLinePath(const std::vector<CurvaturePiece>& pieces, double eps, double psi0) : eps_(eps) {
        // start at the middle of the first piece so no window straddles sigma = 0
        std::vector<CurvaturePiece> segs;
        segs.push_back({0.5 * pieces[0].length, pieces[0].kappa});
        for (std::size_t i = 1; i < pieces.size(); ++i) segs.push_back(pieces[i]);
        segs.push_back({0.5 * pieces[0].length, pieces[0].kappa});

        double cursor = 0.0;
        bool blended_in = false;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            double end = cursor + segs[i].length;
            bool blend_out = i + 1 < segs.size() && segs[i + 1].kappa != segs[i].kappa;
            double a = blended_in ? cursor + 0.5 * eps : cursor;
            double b = blend_out ? end - 0.5 * eps : end;
            if (b > a) iv_.push_back({a, b, segs[i].kappa, segs[i].kappa, false, {}, 0.0});
            if (blend_out) iv_.push_back({b, end + 0.5 * eps, segs[i].kappa, segs[i + 1].kappa, true, {}, 0.0});
            blended_in = blend_out;
            cursor = end;
        }
        perimeter_ = cursor;

        Vec2 p{};
        double psi = psi0;
        for (auto& iv : iv_) {
            iv.p0 = p;
            iv.psi0 = psi;
            State s = eval_in(iv, iv.b);
            p = s.pos;
            psi = s.psi;
        }
        closure_ = norm(p);
        turning_ = psi - psi0;
    }

    double perimeter() const { return perimeter_; }
    double closure_error() const { return closure_; }
    double total_turning() const { return turning_; }
    void translate(Vec2 d) {
        for (auto& iv : iv_) iv.p0 += d;
    }

    State eval(double sigma) const {
        sigma = std::clamp(sigma, 0.0, perimeter_);
        auto it = std::upper_bound(iv_.begin(), iv_.end(), sigma,
                                   [](double s, const Interval& iv) { return s < iv.a; });
        const Interval& iv = (it == iv_.begin()) ? iv_.front() : *std::prev(it);
        return eval_in(iv, sigma);
    }

    // curvature derivative with respect to arclength
    double dkappa(double sigma) const {
        sigma = std::clamp(sigma, 0.0, perimeter_);
        auto it = std::upper_bound(iv_.begin(), iv_.end(), sigma,
                                   [](double s, const Interval& iv) { return s < iv.a; });
        const Interval& iv = (it == iv_.begin()) ? iv_.front() : *std::prev(it);
        if (!iv.blend) return 0.0;
        double x = (sigma - iv.a) / eps_;
        return (iv.k1 - iv.k0) * 30.0 * x * x * (1.0 - x) * (1.0 - x) / eps_;
    }

    bool in_window(double sigma) const {
        for (const auto& iv : iv_)
            if (iv.blend && sigma >= iv.a && sigma <= iv.b) return true;
        return false;
    }

private:
    struct Interval {
        double a, b;
        double k0, k1;
        bool blend;
        Vec2 p0;
        double psi0;
    };

    double psi_at(const Interval& iv, double sigma) const {
        double ds = sigma - iv.a;
        if (!iv.blend) return iv.psi0 + iv.k0 * ds;
        double x = ds / eps_;
        return iv.psi0 + iv.k0 * ds + (iv.k1 - iv.k0) * eps_ * smoothstep5_int(x);
    }

    State eval_in(const Interval& iv, double sigma) const {
        double psi = psi_at(iv, sigma);
        if (!iv.blend) {
            double k = iv.k0;
            Vec2 p;
            if (k == 0.0) {
                p = iv.p0 + unit_at(iv.psi0) * (sigma - iv.a);
            } else {
                p = iv.p0 + Vec2{std::sin(psi) - std::sin(iv.psi0), std::cos(iv.psi0) - std::cos(psi)} / k;
            }
            return {p, psi, k};
        }
        using GL = boost::math::quadrature::gauss<double, 20>;
        double cx = 0.0, cy = 0.0;
        if (sigma > iv.a) {
            cx = GL::integrate([&](double u) { return std::cos(psi_at(iv, u)); }, iv.a, sigma);
            cy = GL::integrate([&](double u) { return std::sin(psi_at(iv, u)); }, iv.a, sigma);
        }
        double x = (sigma - iv.a) / eps_;
        double k = iv.k0 + (iv.k1 - iv.k0) * smoothstep5(x);
        return {iv.p0 + Vec2{cx, cy}, psi, k};
    }

    double eps_;
    double perimeter_ = 0.0;
    double closure_ = 0.0;
    double turning_ = 0.0;
    std::vector<Interval> iv_;
};

} // namespace detail

class BoundaryCurve {
public:
    explicit BoundaryCurve(ShapeSpec spec) : spec_(std::move(spec)) { build(); }

    CurveKind kind() const { return kind_; }
    const ShapeSpec& spec() const { return spec_; }
    Vec2 centroid() const { return centroid_; }
    double perimeter() const { return perimeter_; }
    double diameter() const { return diameter_; }
    double closure_error() const { return path_ ? path_->closure_error() : 0.0; }
    // true when the parameter is proportional to arclength
    bool uniform_speed() const { return kind_ == CurveKind::circle || path_ != nullptr; }

    Vec2 position(double t) const {
        if (const auto* c = std::get_if<CircleSpec>(&spec_)) return c->center + unit_at(t) * c->radius;
        if (const auto* e = std::get_if<EllipseSpec>(&spec_))
            return e->center + Vec2{e->a * std::cos(t), e->b * std::sin(t)};
        if (path_) return path_->eval(sigma_of(t)).pos;
        return series(t, 0);
    }

    Vec2 d1(double t) const {
        if (const auto* c = std::get_if<CircleSpec>(&spec_)) return left_perp(unit_at(t)) * c->radius;
        if (const auto* e = std::get_if<EllipseSpec>(&spec_)) return {-e->a * std::sin(t), e->b * std::cos(t)};
        if (path_) return unit_at(path_->eval(sigma_of(t)).psi) * scale();
        return series(t, 1);
    }

    Vec2 d2(double t) const {
        if (const auto* c = std::get_if<CircleSpec>(&spec_)) return unit_at(t) * (-c->radius);
        if (const auto* e = std::get_if<EllipseSpec>(&spec_)) return {-e->a * std::cos(t), -e->b * std::sin(t)};
        if (path_) {
            auto s = path_->eval(sigma_of(t));
            return left_perp(unit_at(s.psi)) * (s.kappa * scale() * scale());
        }
        return series(t, 2);
    }

    double speed(double t) const { return norm(d1(t)); }
    Vec2 tangent(double t) const { return normalized(d1(t)); }
    Vec2 outward_normal(double t) const { return right_perp(tangent(t)); }

    // signed curvature, positive for counterclockwise convex arcs
    double curvature(double t) const {
        if (const auto* c = std::get_if<CircleSpec>(&spec_)) return 1.0 / c->radius;
        if (path_) return path_->eval(sigma_of(t)).kappa;
        Vec2 p1 = d1(t);
        double v = norm(p1);
        return cross(p1, d2(t)) / (v * v * v);
    }

    // derivative of curvature with respect to arclength
    double curvature_slope(double t) const {
        if (kind_ == CurveKind::circle) return 0.0;
        if (path_) return path_->dkappa(sigma_of(t));
        double h = 1e-4;
        return (curvature(t + h) - curvature(t - h)) / (2.0 * h * speed(t));
    }

    // true if the point lies in a curvature blending window (piecewise kinds only)
    bool in_smoothing_window(double t) const { return path_ && path_->in_window(sigma_of(t)); }

    double arclength(double t0, double t1) const {
        if (!(t1 >= t0) || t1 > t0 + two_pi + 1e-12)
            throw Error(ErrorCode::invalid_argument, "arclength requires t0 <= t1 <= t0 + 2pi");
        return signed_arclength(t0, t1);
    }

    // arclength from t0 to t, negative when t < t0; |t - t0| <= 2pi
    double signed_arclength(double t0, double t1) const {
        if (t1 == t0) return 0.0;
        if (uniform_speed()) return (t1 - t0) * perimeter_ / two_pi;
        using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
        double err = 0.0;
        double lo = std::min(t0, t1), hi = std::max(t0, t1);
        double v = GK::integrate([this](double t) { return speed(t); }, lo, hi, 15, 1e-12, &err);
        if (!std::isfinite(v) || err > 1e-10 * std::max(1.0, std::abs(v)))
            throw Error(ErrorCode::accuracy, "arclength quadrature did not converge");
        return t1 >= t0 ? v : -v;
    }

    // parameter reached after signed arclength s from t0
    double param_at_arclength(double t0, double s) const {
        if (s == 0.0) return t0;
        if (uniform_speed()) return t0 + s * two_pi / perimeter_;
        double t = t0 + s / speed(t0);
        for (int i = 0; i < 60; ++i) {
            double f = signed_arclength(t0, t) - s;
            double step = f / speed(t);
            t -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(t))) break;
        }
        return t;
    }

    // parameter maximizing <position, dir>
    double support_param(Vec2 dir) const {
        if (const auto* c = std::get_if<CircleSpec>(&spec_)) {
            (void)c;
            return wrap_2pi(std::atan2(dir.y, dir.x));
        }
        if (const auto* e = std::get_if<EllipseSpec>(&spec_))
            return wrap_2pi(std::atan2(e->b * dir.y, e->a * dir.x));
        double target = std::atan2(dir.y, dir.x);
        auto r = solve_winding_angle(
            [this](double t) {
                Vec2 n = outward_normal(t);
                return std::atan2(n.y, n.x);
            },
            target);
        if (!r) throw Error(ErrorCode::accuracy, "support point not bracketed");
        return *r;
    }

    // parameter of the boundary point in the direction `dir` seen from the centroid
    double polar_param(Vec2 dir) const {
        if (kind_ == CurveKind::circle) return wrap_2pi(std::atan2(dir.y, dir.x));
        if (const auto* e = std::get_if<EllipseSpec>(&spec_))
            return wrap_2pi(std::atan2(dir.y / e->b, dir.x / e->a));
        double target = std::atan2(dir.y, dir.x);
        auto r = solve_winding_angle(
            [this](double t) {
                Vec2 v = position(t) - centroid_;
                return std::atan2(v.y, v.x);
            },
            target);
        if (!r) throw Error(ErrorCode::accuracy, "polar point not bracketed");
        return *r;
    }

    // strict interior test
    bool contains(Vec2 p) const {
        if (const auto* c = std::get_if<CircleSpec>(&spec_)) return distance(p, c->center) < c->radius;
        if (const auto* e = std::get_if<EllipseSpec>(&spec_)) {
            Vec2 q = p - e->center;
            return (q.x / e->a) * (q.x / e->a) + (q.y / e->b) * (q.y / e->b) < 1.0;
        }
        Vec2 v = p - centroid_;
        double r = norm(v);
        if (r == 0.0) return true;
        Vec2 q = position(polar_param(v));
        return r < distance(q, centroid_);
    }

    // signed distance-like margin: positive inside (exact for circles)
    double inside_margin(Vec2 p) const {
        if (const auto* c = std::get_if<CircleSpec>(&spec_)) return c->radius - distance(p, c->center);
        Vec2 v = p - centroid_;
        double r = norm(v);
        if (r == 0.0) return diameter_;
        Vec2 q = position(polar_param(v));
        return distance(q, centroid_) - r;
    }

private:
    double scale() const { return perimeter_ / two_pi; }
    double sigma_of(double t) const { return wrap_2pi(t) * scale(); }

    Vec2 series(double t, int order) const {
        const auto& a = std::get<ConformalSpec>(spec_).coefficients;
        std::complex<double> z = std::polar(1.0, t);
        std::complex<double> zn = 1.0;
        std::complex<double> acc = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n) {
            std::complex<double> f = 1.0;
            double dn = static_cast<double>(n);
            if (order == 1) f = {0.0, dn};
            if (order == 2) f = -dn * dn;
            acc += a[n] * f * zn;
            zn *= z;
        }
        return {acc.real(), acc.imag()};
    }

    void build() {
        std::visit([this](const auto& s) { init(s); }, spec_);
        double rmax = 0.0;
        for (int i = 0; i < 512; ++i) rmax = std::max(rmax, distance(position(two_pi * i / 512.0), centroid_));
        diameter_ = 2.0 * rmax;
        validate();
    }

    void init(const CircleSpec& c) {
        kind_ = CurveKind::circle;
        if (!(c.radius > 0) || !std::isfinite(c.radius)) throw Error(ErrorCode::invalid_shape, "circle radius must be positive");
        centroid_ = c.center;
        perimeter_ = two_pi * c.radius;
    }

    void init(const EllipseSpec& e) {
        kind_ = CurveKind::ellipse;
        if (!(e.a > 0) || !(e.b > 0)) throw Error(ErrorCode::invalid_shape, "ellipse semi-axes must be positive");
        centroid_ = e.center;
        using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
        double err = 0.0;
        perimeter_ = GK::integrate([this](double t) { return speed(t); }, 0.0, two_pi, 15, 1e-12, &err);
    }

    void init(const StadiumSpec& s) {
        kind_ = CurveKind::smoothed_stadium;
        if (!(s.radius > 0) || !(s.flat_length > 0) || !(s.smoothing > 0))
            throw Error(ErrorCode::invalid_shape, "stadium radius, flat length and smoothing must be positive");
        double arc = std::numbers::pi * s.radius;
        if (s.smoothing >= std::min(arc, s.flat_length))
            throw Error(ErrorCode::smoothing_overlap, "stadium smoothing window exceeds a piece length");
        double k = 1.0 / s.radius;
        std::vector<detail::CurvaturePiece> pieces{{arc, k}, {s.flat_length, 0.0}, {arc, k}, {s.flat_length, 0.0}};
        finish_path(pieces, s.smoothing, s.center, 2);
    }

    void init(const RoundedTriangleSpec& s) {
        kind_ = CurveKind::rounded_triangle;
        if (!(s.height > 0) || !(s.corner_radius > 0) || !(s.smoothing > 0))
            throw Error(ErrorCode::invalid_shape, "triangle height, corner radius and smoothing must be positive");
        double inradius = s.height / 3.0 - s.corner_radius;
        if (!(inradius > 0)) throw Error(ErrorCode::invalid_shape, "corner radius too large for triangle height");
        double side = 2.0 * std::sqrt(3.0) * inradius;
        double arc = two_pi * s.corner_radius / 3.0;
        if (s.smoothing >= std::min(arc, side))
            throw Error(ErrorCode::smoothing_overlap, "triangle smoothing window exceeds a piece length");
        double k = 1.0 / s.corner_radius;
        std::vector<detail::CurvaturePiece> pieces{{arc, k}, {side, 0.0}, {arc, k}, {side, 0.0}, {arc, k}, {side, 0.0}};
        finish_path(pieces, s.smoothing, s.center, 3);
    }

    void init(const ConformalSpec& c) {
        kind_ = CurveKind::conformal_series;
        if (c.coefficients.size() < 2 || std::abs(c.coefficients[1]) == 0.0)
            throw Error(ErrorCode::invalid_shape, "conformal series needs a nonzero linear coefficient");
        centroid_ = {c.coefficients[0].real(), c.coefficients[0].imag()};
        for (int i = 0; i < 512; ++i)
            if (norm(series(two_pi * i / 512.0, 1)) < 1e-12)
                throw Error(ErrorCode::singular_parametrization, "phi' vanishes on the unit circle");
        using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
        double err = 0.0;
        perimeter_ = GK::integrate([this](double t) { return speed(t); }, 0.0, two_pi, 15, 1e-12, &err);
    }

    void finish_path(const std::vector<detail::CurvaturePiece>& pieces, double eps, Vec2 center, int symmetry) {
        path_ = std::make_shared<detail::ArcLinePath>(pieces, eps, std::numbers::pi / 2.0);
        perimeter_ = path_->perimeter();
        Vec2 mean{};
        for (int j = 0; j < symmetry; ++j) mean += path_->eval(perimeter_ * j / symmetry).pos;
        mean = mean / static_cast<double>(symmetry);
        auto shifted = std::make_shared<detail::ArcLinePath>(*path_);
        shifted->translate(center - mean);
        path_ = shifted;
        centroid_ = center;
    }

    void validate() const {
        double tol = 1e-12 * std::max(1.0, diameter_);
        if (distance(position(0.0), position(two_pi)) > tol || closure_error() > 1e-11 * std::max(1.0, diameter_))
            throw Error(ErrorCode::accuracy, "curve does not close");
        bool piecewise = path_ != nullptr;
        for (int i = 0; i < 1024; ++i) {
            double t = two_pi * i / 1024.0;
            double k = curvature(t);
            if (piecewise ? k < -1e-12 : !(k > 0.0))
                throw Error(ErrorCode::convexity_violation, "curvature not positive at t=" + std::to_string(t));
        }
    }

    ShapeSpec spec_;
    CurveKind kind_ = CurveKind::circle;
    Vec2 centroid_{};
    double perimeter_ = 0.0;
    double diameter_ = 0.0;
    std::shared_ptr<const detail::ArcLinePath> path_;
};

struct GeodesicFrame {
    double t_p = 0.0;
};

inline BoundaryCurve make_curve(const ShapeSpec& spec) { return BoundaryCurve(spec); }

inline PlanarPoint eval_boundary(const BoundaryCurve& c, double t) { return c.position(t); }

inline double curvature_at(const BoundaryCurve& c, double t) {
    double k = c.curvature(t);
    bool piecewise = c.kind() == CurveKind::smoothed_stadium || c.kind() == CurveKind::rounded_triangle;
    if (piecewise ? k < -1e-12 : !(k > 0.0))
        throw Error(ErrorCode::convexity_violation, "non-positive curvature");
    return k;
}

inline Vec2 outward_normal(const BoundaryCurve& c, double t) { return c.outward_normal(t); }

inline double arclength(const BoundaryCurve& c, double t0, double t1) { return c.arclength(t0, t1); }

// signed arclength from the frame base, taking the shorter way around
inline double geodesic_coordinate(const BoundaryCurve& c, const GeodesicFrame& f, double t) {
    double dt = wrap_2pi(t - f.t_p);
    if (dt == 0.0) return 0.0;
    double s = c.signed_arclength(f.t_p, f.t_p + dt);
    if (s > 0.5 * c.perimeter()) s -= c.perimeter();
    return s;
}

// Ray queries against a single convex curve.

struct CurveHit {
    double distance;
    double param;
    Vec2 point;
    bool grazing = false;
};

// first boundary crossing of a ray started strictly inside the curve
inline CurveHit exit_from_inside(const BoundaryCurve& c, Vec2 o, Vec2 dir) {
    if (const auto* cs = std::get_if<CircleSpec>(&c.spec())) {
        Vec2 w = o - cs->center;
        double b = dot(w, dir);
        double q = dot(w, w) - cs->radius * cs->radius;
        double sq = std::sqrt(b * b - q);
        double u = b > 0 ? -q / (b + sq) : sq - b;
        Vec2 p = o + dir * u;
        return {u, wrap_2pi(std::atan2(p.y - cs->center.y, p.x - cs->center.x)), p};
    }
    if (const auto* e = std::get_if<EllipseSpec>(&c.spec())) {
        Vec2 q{(o.x - e->center.x) / e->a, (o.y - e->center.y) / e->b};
        Vec2 d{dir.x / e->a, dir.y / e->b};
        double A = dot(d, d), B = dot(q, d), C = dot(q, q) - 1.0;
        double disc = std::sqrt(B * B - A * C);
        double u = B > 0 ? -C / (B + disc) : (-B + disc) / A;
        Vec2 m = q + d * u;
        double t = wrap_2pi(std::atan2(m.y, m.x));
        return {u, t, o + dir * u};
    }
    double target = std::atan2(dir.y, dir.x);
    auto r = solve_winding_angle(
        [&](double t) {
            Vec2 v = c.position(t) - o;
            return std::atan2(v.y, v.x);
        },
        target);
    if (!r) throw Error(ErrorCode::accuracy, "ray exit not bracketed");
    double t = *r;
    for (int i = 0; i < 2; ++i) {
        double f = cross(dir, c.position(t) - o);
        double df = cross(dir, c.d1(t));
        if (df == 0.0) break;
        double tn = t - f / df;
        if (std::abs(tn - t) > 1e-6) break;
        t = tn;
    }
    Vec2 p = c.position(t);
    return {dot(dir, p - o), wrap_2pi(t), p};
}

// first crossing of the ray o + u dir (u > 0) with a convex curve, from outside
inline std::optional<CurveHit> first_hit(const BoundaryCurve& c, Vec2 o, Vec2 dir) {
    const double graze = 1e-10 * std::max(1.0, c.diameter());
    if (const auto* cs = std::get_if<CircleSpec>(&c.spec())) {
        Vec2 w = o - cs->center;
        double b = dot(w, dir);
        double q = dot(w, w) - cs->radius * cs->radius;
        double disc = b * b - q;
        auto at = [&](double u, bool g) -> std::optional<CurveHit> {
            if (!(u > 0)) return std::nullopt;
            Vec2 p = o + dir * u;
            return CurveHit{u, wrap_2pi(std::atan2(p.y - cs->center.y, p.x - cs->center.x)), p, g};
        };
        if (disc < 0) {
            if (disc > -graze * graze) return at(-b, true);
            return std::nullopt;
        }
        double sq = std::sqrt(disc);
        if (sq <= 0.5 * graze) return at(-b, true);
        // stable pair of roots
        double u1, u2;
        if (b > 0) {
            u1 = -b - sq;
            u2 = q / u1;
        } else {
            u2 = -b + sq;
            u1 = q / u2;
        }
        if (u1 > u2) std::swap(u1, u2);
        if (u1 > 0) return at(u1, false);
        if (u2 > 0) return at(u2, false);
        return std::nullopt;
    }
    if (const auto* e = std::get_if<EllipseSpec>(&c.spec())) {
        Vec2 q{(o.x - e->center.x) / e->a, (o.y - e->center.y) / e->b};
        Vec2 d{dir.x / e->a, dir.y / e->b};
        double A = dot(d, d), B = dot(q, d), C = dot(q, q) - 1.0;
        double disc = B * B - A * C;
        auto at = [&](double u, bool g) -> std::optional<CurveHit> {
            if (!(u > 0)) return std::nullopt;
            Vec2 m = q + d * u;
            return CurveHit{u, wrap_2pi(std::atan2(m.y, m.x)), o + dir * u, g};
        };
        double sep_scale = std::sqrt(A);
        if (disc < 0) {
            if (std::sqrt(-disc) / A * sep_scale < 0.5 * graze) return at(-B / A, true);
            return std::nullopt;
        }
        double sq = std::sqrt(disc);
        if (sq / A * sep_scale <= 0.5 * graze) return at(-B / A, true);
        double u1, u2;
        if (B > 0) {
            u1 = (-B - sq) / A;
            u2 = C / (A * u1);
        } else {
            u2 = (-B + sq) / A;
            u1 = C / (A * u2);
        }
        if (u1 > u2) std::swap(u1, u2);
        if (u1 > 0) return at(u1, false);
        if (u2 > 0) return at(u2, false);
        return std::nullopt;
    }
    // signed offset of the curve from the ray's line
    Vec2 side = left_perp(dir);
    auto h = [&](double t) { return dot(c.position(t) - o, side); };
    double tmax = c.support_param(side);
    double tmin = c.support_param(-side);
    double hmax = h(tmax), hmin = h(tmin);
    if (hmax < -graze || hmin > graze) return std::nullopt;
    auto hit_at = [&](double t, bool g) -> std::optional<CurveHit> {
        Vec2 p = c.position(t);
        double u = dot(p - o, dir);
        if (!(u > 0)) return std::nullopt;
        return CurveHit{u, wrap_2pi(t), p, g};
    };
    if (hmax <= graze) return hit_at(tmax, true);
    if (hmin >= -graze) return hit_at(tmin, true);
    auto dh = [&](double t) { return dot(c.d1(t), side); };
    double a1 = tmin, b1 = tmin + wrap_2pi(tmax - tmin);
    double a2 = tmax, b2 = tmax + wrap_2pi(tmin - tmax);
    double r1 = bisect_newton(h, dh, a1, b1);
    double r2 = bisect_newton(h, dh, a2, b2);
    auto h1 = hit_at(r1, false);
    auto h2 = hit_at(r2, false);
    if (h1 && h2) return h1->distance <= h2->distance ? h1 : h2;
    return h1 ? h1 : h2;
}

} // namespace nestdyn
