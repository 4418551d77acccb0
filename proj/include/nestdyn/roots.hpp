// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include "nestdyn/error.hpp"
#include "nestdyn/vec2.hpp"

namespace nestdyn {

// Bisection on a sign change down to `width`, then a couple of guarded Newton steps.
template <class F, class DF>
double bisect_newton(F&& f, DF&& df, double lo, double hi, double width = 1e-13, int polish = 2) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0) == (fhi < 0))
        throw Error(ErrorCode::accuracy, "bisect_newton: no sign change in bracket");
    const double lo0 = lo, hi0 = hi;
    while (hi - lo > width) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double t = 0.5 * (lo + hi);
    double ft = f(t);
    for (int i = 0; i < polish && ft != 0.0; ++i) {
        double d = df(t);
        if (d == 0.0 || !std::isfinite(d)) break;
        double tn = t - ft / d;
        if (!(tn >= lo0 && tn <= hi0)) break;
        double fn = f(tn);
        if (std::abs(fn) >= std::abs(ft)) break;
        t = tn;
        ft = fn;
    }
    return t;
}

// Solve wrap(angle(t) - target) = 0 for an angle function that winds once,
// increasing, over t in [0, 2pi). Returns a bracketed root refined to `width`.
template <class A>
std::optional<double> solve_winding_angle(A&& angle, double target, double width = 1e-13) {
    auto g = [&](double t) { return wrap_pi(angle(t) - target); };
    for (std::size_t n : {128u, 1024u, 8192u}) {
        double h = two_pi / static_cast<double>(n);
        double t0 = 0.0;
        double g0 = g(t0);
        for (std::size_t i = 1; i <= n; ++i) {
            double t1 = (i == n) ? two_pi : h * static_cast<double>(i);
            double g1 = g(t1);
            if (g0 == 0.0) return t0;
            if (g0 < 0.0 && g1 >= 0.0 && g1 - g0 < std::numbers::pi) {
                if (g1 == 0.0) return t1;
                double lo = t0, hi = t1;
                while (hi - lo > width) {
                    double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    double gm = g(mid);
                    if (gm == 0.0) return mid;
                    if (gm < 0.0) lo = mid;
                    else hi = mid;
                }
                return 0.5 * (lo + hi);
            }
            t0 = t1;
            g0 = g1;
        }
    }
    return std::nullopt;
}

} // namespace nestdyn
