// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nestdyn/dynamics.hpp"

namespace nestdyn {

struct TangencyPoint {
    std::size_t k = 0;
    Vec2 p{};
    double t = 0.0;       // on C_k
    double t_next = 0.0;  // on C_{k+1}
    double gap = 0.0;     // support-function gap at the refined minimum
    double normal_misalignment = 0.0;
    double kappa_k = 0.0;
    double kappa_k1 = 0.0;
    // filled when the level domain is supplied
    std::optional<double> d;
    std::optional<Vec2> x;
    std::optional<double> R_measured;        // 1 / curvature of dOmega at x
    std::optional<double> R_paper_relation;  // 1/kappa_k - d
    std::optional<double> g1_predicted;      // (1 + d kappa_k)(1 - d/R)
};

namespace detail {

inline double support_value(const BoundaryCurve& c, Vec2 u, double* t_out = nullptr) {
    double t = c.support_param(u);
    if (t_out) *t_out = t;
    return dot(c.position(t), u);
}

} // namespace detail

inline void populate_domain_fields(TangencyPoint& tp, const BoundaryCurve& ck, const Domain& om) {
    RadialImage x = radial_map(ck, om, tp.t);
    tp.d = x.d;
    tp.x = x.point;
    double kom = om.curvature(x.where);
    tp.R_measured = kom > 0 ? 1.0 / kom : std::numeric_limits<double>::infinity();
    tp.R_paper_relation = 1.0 / tp.kappa_k - x.d;
    tp.g1_predicted = (1.0 + x.d * tp.kappa_k) * (1.0 - x.d / *tp.R_measured);
}

// Isolated contact points of C_{k+1} with C_k, found as zeros of the support-function gap.
inline std::vector<TangencyPoint> find_tangencies(const BoundaryCurve& ck, const BoundaryCurve& ck1,
                                                  std::optional<double> tol = std::nullopt, std::size_t k = 0) {
    const double eps = tol.value_or(1e-7 * ck.diameter());
    constexpr int n = 720;
    std::array<double, n> gap{};
    for (int i = 0; i < n; ++i) {
        Vec2 u = unit_at(two_pi * i / n);
        gap[i] = detail::support_value(ck, u) - detail::support_value(ck1, u);
    }
    bool coincident = true;
    for (double g : gap) coincident = coincident && std::abs(g) < eps;
    std::vector<TangencyPoint> out;
    if (coincident) return out;

    auto dgap = [&](double phi) {
        Vec2 u = unit_at(phi);
        double ta, tb;
        detail::support_value(ck, u, &ta);
        detail::support_value(ck1, u, &tb);
        return dot(ck.position(ta) - ck1.position(tb), left_perp(u));
    };
    for (int i = 0; i < n; ++i) {
        double gm = gap[(i + n - 1) % n], g0 = gap[i], gp = gap[(i + 1) % n];
        if (!(g0 <= gm && g0 < gp)) continue;
        if (g0 > 100.0 * eps + 1e-3 * ck.diameter()) continue;
        double lo = two_pi * (i - 1) / n, hi = two_pi * (i + 1) / n;
        double phi;
        double dl = dgap(lo), dh = dgap(hi);
        if (dl < 0 && dh > 0) {
            phi = bisect_newton(dgap, [](double) { return 0.0; }, lo, hi, 1e-14, 0);
        } else {
            phi = two_pi * i / n;
        }
        Vec2 u = unit_at(phi);
        TangencyPoint tp;
        tp.k = k;
        double ga = detail::support_value(ck, u, &tp.t) - detail::support_value(ck1, u, &tp.t_next);
        tp.gap = ga;
        if (!(std::abs(ga) < eps)) continue;
        tp.p = ck.position(tp.t);
        if (distance(tp.p, ck1.position(tp.t_next)) > 1e-7 * std::max(1.0, ck.diameter())) continue;
        tp.normal_misalignment = norm(ck.outward_normal(tp.t) - ck1.outward_normal(tp.t_next));
        tp.kappa_k = ck.curvature(tp.t);
        tp.kappa_k1 = ck1.curvature(tp.t_next);
        tp.t = wrap_2pi(tp.t);
        tp.t_next = wrap_2pi(tp.t_next);
        out.push_back(tp);
    }
    return out;
}

inline std::vector<TangencyPoint> find_tangencies(const BoundaryCurve& ck, const Domain& om, const BoundaryCurve& ck1,
                                                  std::optional<double> tol = std::nullopt, std::size_t k = 0) {
    auto pts = find_tangencies(ck, ck1, tol, k);
    for (auto& tp : pts) populate_domain_fields(tp, ck, om);
    return pts;
}

struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;
};

inline AlphaBeta alpha_beta_formula(double kappa_k, double kappa_k1, double d, double R) {
    if (!(R > 0.0)) throw Error(ErrorCode::degenerate_geometry, "outer curvature radius must be positive");
    double gap = 1.0 / kappa_k - 1.0 / kappa_k1;
    double alpha = 0.5 * gap * d * d / R;
    double beta = kappa_k1 / (4.0 * kappa_k * kappa_k) * gap * d * d / R;
    return {alpha, beta};
}

inline AlphaBeta alpha_beta_formula(const TangencyPoint& tp) {
    if (!tp.d || !tp.R_measured) throw Error(ErrorCode::invalid_argument, "tangency point lacks thickness data");
    return alpha_beta_formula(tp.kappa_k, tp.kappa_k1, *tp.d, *tp.R_measured);
}

// -------- local quadratic fit of the transition in geodesic coordinates

struct FitOptions {
    double sigma = 1e-2;
    int scales = 5;
    int half_points = 4;  // 2*half_points + 1 points per scale
};

struct ScaleFit {
    double sigma = 0.0;
    double g1 = 0.0;
    double alpha = 0.0;
    double residual = 0.0;
    std::optional<double> deviation;  // |alpha - alpha_formula| / alpha_formula
};

struct QuadraticFit {
    std::size_t k = 0;
    std::size_t anchor = 0;
    std::string label;
    double g1 = 0.0;     // finest scale
    double alpha = 0.0;  // finest scale
    double g1_all = 0.0;
    double alpha_all = 0.0;
    double residual = 0.0;  // max abs residual of the all-scale fit
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    std::vector<ScaleFit> per_scale;  // coarse to fine
    double alpha_stability = 0.0;     // relative change between the two finest scales
    std::optional<double> deviation_stability;
    double alpha_plus = 0.0;  // one-sided fits pooled over all scales
    double alpha_minus = 0.0;
    double g1_plus = 0.0;
    double g1_minus = 0.0;
    std::vector<std::array<double, 2>> samples;  // (s_k, s_{k+1})
};

namespace detail {

// least squares y = a x + b x^2
inline std::array<double, 2> fit_linear_quadratic(const std::vector<std::array<double, 2>>& pts) {
    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
    for (auto [x, y] : pts) {
        double x2 = x * x;
        s11 += x2;
        s12 += x2 * x;
        s22 += x2 * x2;
        r1 += x * y;
        r2 += x2 * y;
    }
    double det = s11 * s22 - s12 * s12;
    if (det == 0.0 || !std::isfinite(det))
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    return {(r1 * s22 - r2 * s12) / det, (s11 * r2 - s12 * r1) / det};
}

inline double max_residual(const std::vector<std::array<double, 2>>& pts, double a, double b) {
    double m = 0;
    for (auto [x, y] : pts) m = std::max(m, std::abs(y - a * x - b * x * x));
    return m;
}

} // namespace detail

// Samples s -> s' of the transition from level k around one of its anchors.
// `chart` maps (curve, anchor param, point param) to a coordinate; defaults to geodesic.
using ChartFn = std::function<double(const BoundaryCurve&, double, double)>;

inline double geodesic_chart(const BoundaryCurve& c, double tp, double t) {
    return geodesic_coordinate(c, GeodesicFrame{tp}, t);
}

inline std::vector<std::vector<std::array<double, 2>>> sample_transition(const NestedScene& scene, std::size_t k,
                                                                         std::size_t anchor, const FitOptions& opt,
                                                                         const ChartFn& chart = geodesic_chart) {
    const Level& L = scene.level(k);
    const Level& N = scene.level(k + 1);
    if (anchor >= L.anchors.size()) throw Error(ErrorCode::invalid_argument, "anchor index out of range");
    double tp = L.anchors[anchor].param;
    double tq = transition(L.body, L.domain, N.body, tp).param;
    std::vector<std::vector<std::array<double, 2>>> grid;
    for (int j = 0; j < opt.scales; ++j) {
        double sig = opt.sigma / std::pow(2.0, j);
        std::vector<std::array<double, 2>> pts;
        for (int i = -opt.half_points; i <= opt.half_points; ++i) {
            double s = sig * i / opt.half_points;
            double t = L.body.param_at_arclength(tp, s);
            TransitionResult g;
            try {
                g = transition(L.body, L.domain, N.body, t);
            } catch (const Error& e) {
                throw Error(e.code(), "fit aborted at level " + std::to_string(k) + ", s=" + format_number(s) + ": " +
                                          e.what());
            }
            pts.push_back({chart(L.body, tp, t), chart(N.body, tq, g.param)});
        }
        grid.push_back(std::move(pts));
    }
    return grid;
}

inline QuadraticFit fit_local_quadratic(const NestedScene& scene, std::size_t k, std::size_t anchor,
                                        const FitOptions& opt = {}, std::optional<double> alpha_formula = std::nullopt) {
    if (opt.scales < 2) throw Error(ErrorCode::invalid_argument, "fit needs at least two dyadic scales");
    auto grid = sample_transition(scene, k, anchor, opt);
    QuadraticFit f;
    f.k = k;
    f.anchor = anchor;
    f.label = scene.level(k).anchors[anchor].label;
    f.sigma_max = opt.sigma;
    f.sigma_min = opt.sigma / std::pow(2.0, opt.scales - 1);
    std::vector<std::array<double, 2>> all, plus, minus;
    for (int j = 0; j < opt.scales; ++j) {
        auto [a, b] = detail::fit_linear_quadratic(grid[j]);
        ScaleFit sf{opt.sigma / std::pow(2.0, j), a, b, detail::max_residual(grid[j], a, b), std::nullopt};
        if (alpha_formula && *alpha_formula != 0.0) sf.deviation = std::abs(b - *alpha_formula) / std::abs(*alpha_formula);
        f.per_scale.push_back(sf);
        for (auto pt : grid[j]) {
            all.push_back(pt);
            if (pt[0] >= 0) plus.push_back(pt);
            if (pt[0] <= 0) minus.push_back(pt);
        }
    }
    auto [ga, aa] = detail::fit_linear_quadratic(all);
    f.g1_all = ga;
    f.alpha_all = aa;
    f.residual = detail::max_residual(all, ga, aa);
    f.g1 = f.per_scale.back().g1;
    f.alpha = f.per_scale.back().alpha;
    const auto& fine = f.per_scale[f.per_scale.size() - 1];
    const auto& next = f.per_scale[f.per_scale.size() - 2];
    f.alpha_stability = std::abs(fine.alpha - next.alpha) / std::abs(next.alpha);
    if (fine.deviation && next.deviation)
        f.deviation_stability = std::abs(*fine.deviation - *next.deviation) / std::abs(*next.deviation);
    auto [gp, ap] = detail::fit_linear_quadratic(plus);
    auto [gm, am] = detail::fit_linear_quadratic(minus);
    f.g1_plus = gp;
    f.alpha_plus = ap;
    f.g1_minus = gm;
    f.alpha_minus = am;
    f.samples = std::move(all);
    return f;
}

// -------- angular variable

struct AngularSlope {
    double slope_plus = 0.0;   // d theta / ds for s > 0
    double slope_minus = 0.0;  // for s < 0, reported as a magnitude
    double slope = 0.0;        // mean of the two
    double h = 0.0;
};

// one-sided Richardson estimate of d theta/ds at an anchor (theta(p) = 0 at a tangency)
inline AngularSlope measure_angular_slope(const BoundaryCurve& c, const Domain& om, double tp, double h = 1e-4) {
    auto th = [&](double s) { return angular_variable(c, om, c.param_at_arclength(tp, s)); };
    double t0 = th(0.0);
    AngularSlope a;
    a.h = h;
    a.slope_plus = 2.0 * (th(h) - t0) / h - (th(2 * h) - t0) / (2 * h);
    a.slope_minus = 2.0 * (th(-h) - t0) / h - (th(-2 * h) - t0) / (2 * h);
    a.slope = 0.5 * (a.slope_plus + a.slope_minus);
    return a;
}

struct AngularFit {
    double linear = 0.0;     // theta_{k+1} ~ linear * theta_k + beta * theta_k^2
    double beta_fit = 0.0;
    double beta_predicted = 0.0;  // kappa_{k+1} alpha_hat / (2 kappa_k^2)
    std::optional<double> relative_error;
    bool degenerate = false;  // theta_k identically zero on the grid
};

inline AngularFit fit_angular_quadratic(const NestedScene& scene, std::size_t k, std::size_t anchor, double alpha_hat,
                                        double kappa_k, double kappa_k1, const FitOptions& opt = {}) {
    const Level& L = scene.level(k);
    const Level& N = scene.level(k + 1);
    double tp = L.anchors[anchor].param;
    std::vector<std::array<double, 2>> pts;
    double tmax = 0.0;
    for (int j = 0; j < opt.scales; ++j) {
        double sig = opt.sigma / std::pow(2.0, j);
        for (int i = 1; i <= opt.half_points; ++i) {
            double t = L.body.param_at_arclength(tp, sig * i / opt.half_points);
            double th0 = angular_variable(L.body, L.domain, t);
            double t1 = transition(L.body, L.domain, N.body, t).param;
            double th1 = angular_variable(N.body, N.domain, t1);
            tmax = std::max(tmax, th0);
            pts.push_back({th0, th1});
        }
    }
    AngularFit f;
    f.beta_predicted = kappa_k1 * alpha_hat / (2.0 * kappa_k * kappa_k);
    if (tmax < 1e-14) {
        f.degenerate = true;
        f.linear = f.beta_fit = std::numeric_limits<double>::quiet_NaN();
        return f;
    }
    auto [a, b] = detail::fit_linear_quadratic(pts);
    f.linear = a;
    f.beta_fit = b;
    if (f.beta_predicted != 0.0) f.relative_error = std::abs(b - f.beta_predicted) / std::abs(f.beta_predicted);
    return f;
}

// -------- super-exponential certificate

struct SuperExpCertificate {
    bool conclusive = false;
    bool pass = false;
    std::string reason;
    std::vector<double> u;
    std::vector<double> ratios;  // u_{k+1} / (2 u_k)
    double rho = 0.0;
    double C = 0.0;
    // lower bound u_k >= (2^k - 1)|log q| - |log r| with r = |s_0|, q = r * max observed |s_{k+1}|/s_k^2
    double r = 0.0;
    double q = 0.0;
    bool bound_holds = false;
};

// u_k = -log|s_k| for the consecutive nonzero steps of an orbit
inline SuperExpCertificate superexp_certificate(std::span<const double> u) {
    SuperExpCertificate c;
    c.u.assign(u.begin(), u.end());
    if (u.size() < 4) {
        c.reason = "inconclusive: fewer than 4 steps with s_k != 0";
        return c;
    }
    c.conclusive = true;
    for (std::size_t k = 0; k + 1 < u.size(); ++k) c.ratios.push_back(u[k + 1] / (2.0 * u[k]));
    bool ratios_ok = c.ratios.size() > 3;
    for (std::size_t k = 3; k < c.ratios.size(); ++k) ratios_ok = ratios_ok && c.ratios[k] >= 0.95 && c.ratios[k] <= 1.05;
    std::size_t K = u.size() - 1;
    double lim = u[K] / std::ldexp(1.0, static_cast<int>(K));
    c.rho = std::exp(-lim);
    double logC = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= K; ++k) logC = std::max(logC, -u[k] + std::ldexp(1.0, static_cast<int>(k)) * lim);
    c.C = std::exp(logC);
    // bound constants: A = sup |s_{k+1}| / s_k^2 observed in log form
    double logA = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) logA = std::max(logA, -u[k + 1] + 2.0 * u[k]);
    double logr = -u[0];
    double logq = logr + logA;
    c.r = std::exp(logr);
    c.q = std::exp(logq);
    c.bound_holds = logq < 0.0;
    for (std::size_t k = 0; k <= K && c.bound_holds; ++k) {
        double bound = (std::ldexp(1.0, static_cast<int>(k)) - 1.0) * std::abs(logq) - std::abs(logr);
        if (u[k] < bound - 1e-9 * std::max(1.0, std::abs(bound))) c.bound_holds = false;
    }
    c.pass = ratios_ok && c.bound_holds && c.rho > 0.0 && c.rho < 1.0;
    if (!ratios_ok) c.reason = "ratios u_{k+1}/(2u_k) leave [0.95, 1.05] for some k >= 3";
    else if (!c.bound_holds) c.reason = "double-exponential lower bound violated or q >= 1";
    return c;
}

inline SuperExpCertificate superexp_certificate(const Orbit& o) {
    std::vector<double> u;
    for (const auto& st : o.steps) {
        if (!st.u || !std::isfinite(*st.u)) break;
        u.push_back(*st.u);
    }
    return superexp_certificate(std::span<const double>(u));
}

// -------- uniform bounds

struct AlphaBounds {
    double alpha_min = 0.0;
    double alpha_max = 0.0;
    double kappa_min = 0.0, kappa_max = 0.0, delta = 0.0;
    double d_min = 0.0, d_max = 0.0, R_min = 0.0, R_max = 0.0;
    std::vector<double> alphas;
    bool all_within = true;
};

inline AlphaBounds alpha_bounds(double kappa_min, double kappa_max, double delta, double d_min, double d_max,
                                double R_min, double R_max) {
    if (!(delta > 0.0)) throw Error(ErrorCode::hypothesis_violation, "curvature gap must be positive");
    AlphaBounds b{};
    b.kappa_min = kappa_min;
    b.kappa_max = kappa_max;
    b.delta = delta;
    b.d_min = d_min;
    b.d_max = d_max;
    b.R_min = R_min;
    b.R_max = R_max;
    b.alpha_min = 0.5 * (delta / (kappa_max * kappa_max)) * d_min * d_min / R_max;
    b.alpha_max = 0.5 * (1.0 / kappa_min - 1.0 / kappa_max) * d_max * d_max / R_min;
    return b;
}

inline AlphaBounds alpha_bounds(const std::vector<TangencyPoint>& tps) {
    if (tps.empty()) throw Error(ErrorCode::hypothesis_violation, "no tangencies");
    double kmin = INFINITY, kmax = 0, delta = INFINITY, dmin = INFINITY, dmax = 0, Rmin = INFINITY, Rmax = 0;
    for (const auto& tp : tps) {
        kmin = std::min({kmin, tp.kappa_k, tp.kappa_k1});
        kmax = std::max({kmax, tp.kappa_k, tp.kappa_k1});
        delta = std::min(delta, tp.kappa_k1 - tp.kappa_k);
        dmin = std::min(dmin, tp.d.value());
        dmax = std::max(dmax, tp.d.value());
        Rmin = std::min(Rmin, tp.R_measured.value());
        Rmax = std::max(Rmax, tp.R_measured.value());
    }
    AlphaBounds b = alpha_bounds(kmin, kmax, delta, dmin, dmax, Rmin, Rmax);
    const double slack = 1e-12;
    for (const auto& tp : tps) {
        double a = alpha_beta_formula(tp).alpha;
        b.alphas.push_back(a);
        if (a < b.alpha_min * (1 - slack) || a > b.alpha_max * (1 + slack)) b.all_within = false;
    }
    return b;
}

// alpha-hat per (level, anchor), fitted lazily and cached
inline AlphaProvider fitted_alpha_provider(const NestedScene& scene, FitOptions opt = {}) {
    struct Cache {
        std::mutex mu;
        std::map<std::pair<std::size_t, std::size_t>, std::optional<double>> v;
    };
    auto cache = std::make_shared<Cache>();
    return [scene, opt, cache](std::size_t k, std::size_t a) -> std::optional<double> {
        std::lock_guard<std::mutex> lock(cache->mu);
        auto key = std::make_pair(k, a);
        if (auto it = cache->v.find(key); it != cache->v.end()) return it->second;
        std::optional<double> r;
        try {
            r = fit_local_quadratic(scene, k, a, opt).alpha;
        } catch (const Error&) {
        }
        cache->v[key] = r;
        return r;
    };
}

} // namespace nestdyn
