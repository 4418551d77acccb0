// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nestdyn/scene.hpp"

namespace nestdyn {

struct TransitionResult {
    Vec2 point{};
    double param = 0.0;  // on the target body
    RadialImage via{};   // intermediate point on the domain boundary
    bool grazing = false;
};

// G = pi_{Omega, target} o Phi_{Omega, body}
inline TransitionResult transition(const BoundaryCurve& body, const Domain& om, const BoundaryCurve& target, double t) {
    RadialImage x = radial_map(body, om, t);
    Projection p = reciprocal_map(om, target, x.where);
    return {p.point, p.param, x, p.grazing};
}

inline TransitionResult return_map(const BoundaryCurve& c, const Domain& om, double t) { return transition(c, om, c, t); }

// signed geodesic coordinate measured from the closest anchor of a level
struct AnchoredCoordinate {
    std::size_t anchor = 0;
    double s = 0.0;
};

inline std::optional<AnchoredCoordinate> nearest_anchor(const Level& L, double t) {
    std::optional<AnchoredCoordinate> best;
    for (std::size_t i = 0; i < L.anchors.size(); ++i) {
        double s = geodesic_coordinate(L.body, GeodesicFrame{L.anchors[i].param}, t);
        if (!best || std::abs(s) < std::abs(best->s)) best = AnchoredCoordinate{i, s};
    }
    return best;
}

enum class StepMode { geometric, log_tracked };

inline const char* to_string(StepMode m) { return m == StepMode::geometric ? "geometric" : "log"; }

struct OrbitStep {
    std::size_t k = 0;
    StepMode mode = StepMode::geometric;
    std::optional<double> t;
    std::optional<Vec2> point;
    std::optional<double> s;
    std::optional<double> theta;
    std::optional<double> d;
    std::optional<double> u;
    std::optional<std::size_t> anchor;
};

// geometric and log-tracked predictions for the first log-tracked step
struct SwitchCheck {
    std::size_t step = 0;
    double u_log = 0.0;
    std::optional<double> u_geometric;
};

struct Orbit {
    std::vector<OrbitStep> steps;
    std::optional<std::string> truncation;
    std::optional<SwitchCheck> switch_check;
};

// fitted quadratic coefficient for the transition leaving (level, anchor)
using AlphaProvider = std::function<std::optional<double>(std::size_t level, std::size_t anchor)>;

struct OrbitOptions {
    double log_switch_threshold = 1e-8;
    AlphaProvider alpha;
};

struct OrbitStart {
    std::optional<double> t0;
    std::optional<double> s0;  // geodesic offset from anchor `anchor` of level 0
    std::size_t anchor = 0;

    static OrbitStart param(double t) { return {t, std::nullopt, 0}; }
    static OrbitStart geodesic(double s, std::size_t anchor = 0) { return {std::nullopt, s, anchor}; }
};

namespace detail {

inline OrbitStep geometric_step(const Level& L, std::size_t k, double t) {
    OrbitStep st;
    st.k = k;
    st.t = wrap_2pi(t);
    st.point = L.body.position(t);
    if (auto a = nearest_anchor(L, t)) {
        st.s = a->s;
        st.anchor = a->anchor;
        if (a->s != 0.0) st.u = -std::log(std::abs(a->s));
    }
    st.d = thickness(L.body, L.domain, t).d;
    st.theta = angular_variable(L.body, L.domain, t);
    return st;
}

} // namespace detail

inline Orbit iterate_orbit(const NestedScene& scene, const OrbitStart& start, std::size_t n_steps,
                           const OrbitOptions& opts = {}) {
    if (!scene.self_similar() && n_steps + 1 > *scene.level_count())
        throw Error(ErrorCode::invalid_argument, "orbit longer than the scene");
    Orbit orb;
    const Level& L0 = scene.level(0);
    double t;
    if (start.t0) {
        t = *start.t0;
    } else {
        if (start.anchor >= L0.anchors.size()) throw Error(ErrorCode::invalid_argument, "start anchor out of range");
        t = L0.body.param_at_arclength(L0.anchors[start.anchor].param, start.s0.value_or(0.0));
    }
    try {
        orb.steps.push_back(detail::geometric_step(L0, 0, t));
    } catch (const Error& e) {
        orb.truncation = std::string("step 0: ") + e.what();
        return orb;
    }

    for (std::size_t k = 0; k < n_steps; ++k) {
        const OrbitStep& cur = orb.steps.back();
        const Level& L = scene.level(k);
        const Level& N = scene.level(k + 1);
        bool log_mode = cur.mode == StepMode::log_tracked ||
                        (cur.s && *cur.s != 0.0 && std::abs(*cur.s) < opts.log_switch_threshold);
        if (!log_mode) {
            try {
                TransitionResult g = transition(L.body, L.domain, N.body, *cur.t);
                orb.steps.push_back(detail::geometric_step(N, k + 1, g.param));
            } catch (const Error& e) {
                orb.truncation = "step " + std::to_string(k + 1) + ": " + e.what();
                return orb;
            }
            continue;
        }
        std::optional<double> a;
        if (opts.alpha && cur.anchor) a = opts.alpha(k, *cur.anchor);
        if (!a) {
            orb.truncation = "step " + std::to_string(k + 1) + ": log tracking needs a fitted alpha";
            return orb;
        }
        if (!(*a > 0.0)) {
            orb.truncation = "step " + std::to_string(k + 1) + ": fitted alpha is not positive (" + std::to_string(*a) + ")";
            return orb;
        }
        OrbitStep st;
        st.k = k + 1;
        st.mode = StepMode::log_tracked;
        st.u = 2.0 * *cur.u - std::log(*a);
        st.anchor = cur.anchor;
        if (cur.mode == StepMode::geometric) {
            SwitchCheck sc{k + 1, *st.u, std::nullopt};
            try {
                TransitionResult g = transition(L.body, L.domain, N.body, *cur.t);
                auto an = nearest_anchor(N, g.param);
                if (an && an->s != 0.0) sc.u_geometric = -std::log(std::abs(an->s));
            } catch (const Error&) {
            }
            orb.switch_check = sc;
        }
        orb.steps.push_back(st);
    }
    return orb;
}

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_orbit_csv(const Orbit& o, std::ostream& os) {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    os << "k,t_k,x,y,s_k,theta_k,d_k,u_k,mode\n";
    for (const auto& st : o.steps) {
        os << st.k << ',' << opt(st.t) << ',' << (st.point ? format_number(st.point->x) : "") << ','
           << (st.point ? format_number(st.point->y) : "") << ',' << opt(st.s) << ',' << opt(st.theta) << ','
           << opt(st.d) << ',' << opt(st.u) << ',' << to_string(st.mode) << '\n';
    }
}

struct GradientCheck {
    double eps = 0.0;
    double d = 0.0;
    double grad_d = 0.0;
    double delta_s = 0.0;  // signed arclength from c to F(c)
    double residual = 0.0;
};

struct GradientExpansion {
    std::vector<GradientCheck> checks;
    std::optional<double> slope;  // absent when every residual vanishes
    bool all_zero = false;
};

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y, double* stderr_out = nullptr) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    double b = sxy / sxx;
    if (stderr_out) {
        double ss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double r = y[i] - my - b * (x[i] - mx);
            ss += r * r;
        }
        *stderr_out = x.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
    }
    return b;
}

inline GradientExpansion gradient_expansion_residual(const BoundaryCurve& c, const std::function<Domain(double)>& family,
                                                     double t,
                                                     std::vector<double> eps = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
    constexpr double h = 1e-5;
    GradientExpansion out;
    std::vector<double> lx, ly;
    for (double e : eps) {
        Domain om = family(e);
        GradientCheck g;
        g.eps = e;
        g.d = thickness(c, om, t).d;
        double dp = thickness(c, om, c.param_at_arclength(t, h)).d;
        double dm = thickness(c, om, c.param_at_arclength(t, -h)).d;
        g.grad_d = (dp - dm) / (2.0 * h);
        double t1 = return_map(c, om, t).param;
        g.delta_s = geodesic_coordinate(c, GeodesicFrame{t}, t1);
        g.residual = std::abs(g.delta_s + 2.0 * g.d * g.grad_d);
        if (g.residual > 0.0) {
            lx.push_back(std::log(e));
            ly.push_back(std::log(g.residual));
        }
        out.checks.push_back(g);
    }
    if (lx.size() >= 2) out.slope = least_squares_slope(lx, ly);
    out.all_zero = lx.empty();
    return out;
}

struct LyapunovReport {
    bool applicable = false;
    std::string reason;
    double d1 = 0.0;  // d'(p) at level-0 anchor, per unit arclength
    double d2 = 0.0;  // d''(p)
    bool monotone = true;
    bool strict = true;  // strict decrease at every step with s_k != 0
    std::optional<std::size_t> first_violation;
    std::vector<double> d;
    bool pass() const { return applicable && monotone && strict; }
};

// hypothesis d'(p) = 0, d''(p) > 0 at the anchors visited by the orbit
inline LyapunovReport lyapunov_check(const NestedScene& scene, const Orbit& orbit, double fd_step = 1e-3) {
    LyapunovReport rep;
    rep.applicable = true;
    bool first = true;
    for (const auto& st : orbit.steps) {
        if (st.mode != StepMode::geometric) break;
        const Level& L = scene.level(st.k);
        if (!st.anchor) {
            rep.applicable = false;
            rep.reason = "no anchor at level " + std::to_string(st.k);
            break;
        }
        double tp = L.anchors[*st.anchor].param;
        auto dd = [&](double s) { return thickness(L.body, L.domain, L.body.param_at_arclength(tp, s)).d; };
        double dp = dd(fd_step), d0 = dd(0.0), dm = dd(-fd_step);
        double d1 = (dp - dm) / (2 * fd_step);
        double d2 = (dp - 2 * d0 + dm) / (fd_step * fd_step);
        if (first) {
            rep.d1 = d1;
            rep.d2 = d2;
            first = false;
        }
        if (std::abs(d1) > 1e-6 || !(d2 > 0.0)) {
            rep.applicable = false;
            rep.reason = "hypothesis fails at level " + std::to_string(st.k) + " (d'=" + format_number(d1) +
                         ", d''=" + format_number(d2) + ")";
            break;
        }
    }
    for (std::size_t i = 0; i < orbit.steps.size(); ++i) {
        const auto& st = orbit.steps[i];
        if (st.mode != StepMode::geometric || !st.d) break;
        rep.d.push_back(*st.d);
        if (i == 0) continue;
        const auto& prev = orbit.steps[i - 1];
        double dk = *prev.d, dk1 = *st.d;
        if (dk1 > dk + 1e-10) {
            rep.monotone = false;
            if (!rep.first_violation) rep.first_violation = i;
        }
        if (prev.s && *prev.s != 0.0 && !(dk1 < dk)) rep.strict = false;
    }
    return rep;
}

} // namespace nestdyn
