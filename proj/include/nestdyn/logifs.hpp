// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nestdyn/dynamics.hpp"
#include "nestdyn/rng.hpp"

namespace nestdyn {

// Branches u -> ratio*u + (1 - ratio)*p_i. With ratio 1/2 and p_i = log alpha_i this is (u + log alpha_i)/2.
struct LogIFS {
    std::vector<double> fixed_points;
    double ratio = 0.5;

    std::size_t size() const { return fixed_points.size(); }
    bool standard_ratio() const { return ratio == 0.5; }
    double apply(std::size_t i, double u) const { return ratio * u + (1.0 - ratio) * fixed_points[i]; }
    double hull_min() const { return *std::min_element(fixed_points.begin(), fixed_points.end()); }
    double hull_max() const { return *std::max_element(fixed_points.begin(), fixed_points.end()); }

    static LogIFS from_fixed_points(std::vector<double> p, double ratio = 0.5) {
        if (p.empty()) throw Error(ErrorCode::invalid_argument, "IFS needs at least one branch");
        if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::invalid_argument, "contraction ratio must lie in (0, 1)");
        return LogIFS{std::move(p), ratio};
    }
};

inline LogIFS branch_maps(const std::vector<double>& alphas, double ratio = 0.5) {
    std::vector<double> p;
    for (double a : alphas) {
        if (!(a > 0.0)) throw Error(ErrorCode::invalid_argument, "branch coefficients must be positive");
        p.push_back(std::log(a));
    }
    return LogIFS::from_fixed_points(std::move(p), ratio);
}

struct AttractorSample {
    std::vector<double> points;
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;
    bool standard_ratio = true;
};

inline AttractorSample chaos_game(const LogIFS& ifs, std::size_t n_points, std::uint64_t seed, std::size_t burn_in = 64) {
    if (n_points < 1000) throw Error(ErrorCode::invalid_argument, "chaos game needs at least 1000 points");
    if (burn_in < 32) throw Error(ErrorCode::invalid_argument, "burn-in must be at least 32");
    SplitMix64 rng(seed);
    AttractorSample out{{}, seed, burn_in, ifs.standard_ratio()};
    out.points.reserve(n_points);
    double u = ifs.fixed_points[0];
    for (std::size_t i = 0; i < burn_in + n_points; ++i) {
        u = ifs.apply(rng.below(ifs.size()), u);
        if (i >= burn_in) out.points.push_back(u);
    }
    return out;
}

inline double similarity_dimension(std::size_t m) {
    if (m < 1) throw Error(ErrorCode::invalid_argument, "branch count must be >= 1");
    return std::log(static_cast<double>(m)) / std::log(2.0);
}

struct DimensionEstimate {
    std::optional<double> similarity;
    double box = 0.0;
    double stderr_ = 0.0;
    std::vector<int> octaves;
    std::vector<double> widths;
    std::vector<std::size_t> counts;
    bool zero_variance = false;
};

// Dyadic bins anchored at the sample minimum; slope of log N against log(1/width).
inline DimensionEstimate box_counting_dimension(const std::vector<double>& pts, int lo = 4, int hi = 8) {
    if (pts.empty()) throw Error(ErrorCode::invalid_argument, "empty sample");
    if (hi - lo < 4) throw Error(ErrorCode::invalid_argument, "box counting needs at least 4 octaves");
    DimensionEstimate est;
    auto [mn, mx] = std::minmax_element(pts.begin(), pts.end());
    double x0 = *mn, W = *mx - *mn;
    if (!(W > 0.0)) {
        est.zero_variance = true;
        return est;
    }
    std::vector<double> lx, ly;
    for (int j = lo; j <= hi; ++j) {
        std::size_t nb = std::size_t{1} << j;
        double w = W / static_cast<double>(nb);
        std::vector<char> hit(nb, 0);
        for (double x : pts) {
            auto b = static_cast<std::size_t>((x - x0) / w);
            hit[std::min(b, nb - 1)] = 1;
        }
        std::size_t n = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
        est.octaves.push_back(j);
        est.widths.push_back(w);
        est.counts.push_back(n);
        lx.push_back(-std::log(w));
        ly.push_back(std::log(static_cast<double>(n)));
    }
    est.box = least_squares_slope(lx, ly, &est.stderr_);
    return est;
}

// Finest 4-octave window the sample can resolve: about 8 points per bin on a full interval.
inline std::pair<int, int> resolved_octaves(std::size_t n_points) {
    int hi = std::max(8, static_cast<int>(std::floor(std::log2(static_cast<double>(n_points)))) - 3);
    return {hi - 4, hi};
}

struct LimitMember {
    std::optional<Vec2> point;
    StepMode mode = StepMode::geometric;
    std::optional<std::size_t> anchor;
    std::optional<std::string> error;
};

struct LimitSetSample {
    std::vector<Vec2> points;
    std::vector<LimitMember> members;
    bool inside_c0 = true;
};

// Accumulation points of an orbit ensemble: last geometric point, or the anchor a log-tracked orbit converges to.
inline LimitSetSample limit_set_sample(const NestedScene& scene, const std::vector<OrbitStart>& starts, std::size_t n_steps,
                                       const OrbitOptions& opts = {}) {
    if (starts.size() < 64) throw Error(ErrorCode::invalid_argument, "ensemble needs at least 64 members");
    const Level& L0 = scene.level(0);
    LimitSetSample out;
    for (const auto& st : starts) {
        LimitMember m;
        Orbit o = iterate_orbit(scene, st, n_steps, opts);
        if (o.truncation) {
            m.error = *o.truncation;
            out.members.push_back(m);
            continue;
        }
        const OrbitStep& last = o.steps.back();
        m.mode = last.mode;
        m.anchor = last.anchor;
        if (last.mode == StepMode::geometric) {
            m.point = last.point;
        } else {
            const Level& L = scene.level(last.k);
            m.point = L.body.position(L.anchors[*last.anchor].param);
        }
        out.points.push_back(*m.point);
        if (L0.body.inside_margin(*m.point) < -1e-9) out.inside_c0 = false;
        out.members.push_back(m);
    }
    return out;
}

struct AnchorCoverage {
    std::vector<std::size_t> hits;  // per anchor
    double max_distance = 0.0;      // worst point-to-nearest-anchor distance
    std::size_t failed = 0;         // members without a point
};

inline AnchorCoverage anchor_coverage(const LimitSetSample& s, const std::vector<Vec2>& anchors, double tol) {
    AnchorCoverage c;
    c.hits.assign(anchors.size(), 0);
    for (const auto& m : s.members) {
        if (!m.point) {
            ++c.failed;
            continue;
        }
        double best = INFINITY;
        std::size_t bi = 0;
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            double d = distance(*m.point, anchors[i]);
            if (d < best) best = d, bi = i;
        }
        c.max_distance = std::max(c.max_distance, best);
        if (best <= tol) ++c.hits[bi];
    }
    return c;
}

} // namespace nestdyn
