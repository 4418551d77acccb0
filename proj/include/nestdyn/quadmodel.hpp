// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nestdyn/error.hpp"

namespace nestdyn {

// s_{k+1} = alpha_{i_k} s_k^2 on [0, r]. Branch labels are 1-based; the itinerary cycles.
struct ToyConfig {
    std::vector<double> alphas;
    double r = 0.0;
    double s0 = 0.0;
    std::vector<int> itinerary{1};

    double q() const { return r * *std::max_element(alphas.begin(), alphas.end()); }
    int branch(std::size_t k) const { return itinerary[k % itinerary.size()]; }
    double alpha_at(std::size_t k) const { return alphas[static_cast<std::size_t>(branch(k) - 1)]; }
};

inline void validate(const ToyConfig& c) {
    if (c.alphas.empty()) throw Error(ErrorCode::invalid_argument, "toy model needs at least one branch");
    for (double a : c.alphas)
        if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::invalid_argument, "branch coefficients must be positive");
    if (!(c.r > 0.0)) throw Error(ErrorCode::invalid_argument, "r must be positive");
    if (c.itinerary.empty()) throw Error(ErrorCode::invalid_argument, "empty itinerary");
    for (int i : c.itinerary)
        if (i < 1 || i > static_cast<int>(c.alphas.size()))
            throw Error(ErrorCode::invalid_argument, "itinerary label " + std::to_string(i) + " out of range");
    if (!(c.q() < 1.0)) throw Error(ErrorCode::hypothesis_violation, "q = r max alpha must be < 1");
    if (!(c.s0 >= 0.0 && c.s0 <= c.r)) throw Error(ErrorCode::invalid_argument, "s0 must lie in [0, r]");
}

struct ToyBound {
    double log_value = 0.0;
    double value = 0.0;
};

// r q^(2^n - 1)
inline ToyBound toy_bound(const ToyConfig& c, std::size_t n) {
    validate(c);
    double lb = std::log(c.r) + (std::ldexp(1.0, static_cast<int>(n)) - 1.0) * std::log(c.q());
    return {lb, std::exp(lb)};
}

struct ToyStep {
    std::size_t k = 0;
    int branch = 1;        // label applied to go from k to k+1
    double s = 0.0;        // direct iteration (may underflow)
    double log_s = 0.0;    // iteration carried in log space
    double log_closed = 0.0;
    double closed_form = 0.0;
    std::optional<double> u;
    ToyBound bound{};
    bool in_interval = true;
    bool within_bound = true;
};

struct ToyOrbit {
    std::vector<ToyStep> steps;
    double max_rel_error = 0.0;  // log-space iteration vs closed form
    std::size_t bound_violations = 0;
    bool interval_ok = true;
};

inline ToyOrbit toy_orbit(const ToyConfig& c, std::size_t n) {
    validate(c);
    ToyOrbit o;
    const double ninf = -std::numeric_limits<double>::infinity();
    double s = c.s0;
    double ls = c.s0 > 0 ? std::log(c.s0) : ninf;
    const double log_r = std::log(c.r), log_q = std::log(c.q());
    for (std::size_t k = 0; k <= n; ++k) {
        ToyStep st;
        st.k = k;
        st.branch = c.branch(k);
        st.s = s;
        st.log_s = ls;
        // alpha_{i_{k-1}} alpha_{i_{k-2}}^2 ... alpha_{i_0}^{2^{k-1}} s_0^{2^k}
        double lc = c.s0 > 0 ? std::ldexp(std::log(c.s0), static_cast<int>(k)) : ninf;
        for (std::size_t j = 0; j < k; ++j) lc += std::ldexp(std::log(c.alpha_at(j)), static_cast<int>(k - 1 - j));
        st.log_closed = lc;
        st.closed_form = std::exp(lc);
        if (ls > ninf) {
            st.u = -ls;
            o.max_rel_error = std::max(o.max_rel_error, std::abs(ls - lc) / std::max(std::abs(lc), 1e-300));
        } else if (lc > ninf) {
            o.max_rel_error = INFINITY;
        }
        st.bound = {log_r + (std::ldexp(1.0, static_cast<int>(k)) - 1.0) * log_q, 0.0};
        st.bound.value = std::exp(st.bound.log_value);
        st.within_bound = ls <= st.bound.log_value + 1e-12 * std::abs(st.bound.log_value);
        st.in_interval = s >= 0.0 && s <= c.r;
        if (!st.within_bound) ++o.bound_violations;
        o.interval_ok = o.interval_ok && st.in_interval;
        o.steps.push_back(st);
        double a = c.alpha_at(k);
        s = a * s * s;
        ls = ls > ninf ? std::log(a) + 2.0 * ls : ninf;
    }
    return o;
}

// u_{k+1} = 2 u_k - log alpha_{i_k}
inline std::vector<double> toy_log_orbit(const ToyConfig& c, std::size_t n) {
    validate(c);
    if (!(c.s0 > 0.0)) throw Error(ErrorCode::invalid_argument, "log orbit needs s0 > 0");
    std::vector<double> u{-std::log(c.s0)};
    for (std::size_t k = 0; k < n; ++k) u.push_back(2.0 * u.back() - std::log(c.alpha_at(k)));
    return u;
}

// inverse branch, contraction by 1/2
inline double toy_inverse_branch(double u, double alpha) { return 0.5 * (u + std::log(alpha)); }

} // namespace nestdyn
