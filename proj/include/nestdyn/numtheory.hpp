// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "nestdyn/error.hpp"

namespace nestdyn {

struct GaussStep {
    std::optional<std::int64_t> digit;  // absent when x = 0 (expansion terminated)
    double value = 0.0;
};

// T(x) = {1/x}
inline GaussStep gauss_map(double x) {
    if (!(x >= 0.0 && x < 1.0)) throw Error(ErrorCode::domain, "Gauss map needs x in [0, 1)");
    if (x == 0.0) return {std::nullopt, 0.0};
    double y = 1.0 / x;
    double a = std::floor(y);
    return {static_cast<std::int64_t>(a), y - a};
}

struct ConvergentRow {
    std::size_t k = 0;
    std::int64_t a = 0;
    std::int64_t p = 0;
    std::int64_t q = 1;
    long double kappa = 0;  // 2 q^2
    long double error = 0;  // |x - p/q|
    bool near_integer = false;  // digit taken from a value within 1e-12 of an integer; expansion stops here
};

struct ConvergentTable {
    long double x = 0;
    std::vector<ConvergentRow> rows;
    bool terminated = false;
    bool overflow = false;
};

namespace detail {

inline bool push_convergent(ConvergentTable& t, std::int64_t a, std::int64_t& p1, std::int64_t& q1, std::int64_t& p0,
                            std::int64_t& q0) {
    std::int64_t pa, qa, p, q;
    if (__builtin_mul_overflow(a, p1, &pa) || __builtin_add_overflow(pa, p0, &p) ||
        __builtin_mul_overflow(a, q1, &qa) || __builtin_add_overflow(qa, q0, &q) || q > 3037000499LL) {
        t.overflow = true;
        return false;
    }
    ConvergentRow r;
    r.k = t.rows.size() + 1;
    r.a = a;
    r.p = p;
    r.q = q;
    r.kappa = 2.0L * static_cast<long double>(q) * static_cast<long double>(q);
    r.error = std::fabs(t.x - static_cast<long double>(p) / static_cast<long double>(q));
    t.rows.push_back(r);
    p0 = p1;
    q0 = q1;
    p1 = p;
    q1 = q;
    return true;
}

} // namespace detail

// x = [0; a_1, a_2, ...], rows k = 1..n with p_0/q_0 = 0/1 and q_{-1} = 0
inline ConvergentTable convergents(double x, std::size_t n) {
    if (n > 40) throw Error(ErrorCode::invalid_argument, "at most 40 convergents");
    if (!(x > 0.0 && x < 1.0)) throw Error(ErrorCode::domain, "x must lie in (0, 1)");
    ConvergentTable t;
    t.x = x;
    std::int64_t p0 = 1, q0 = 0, p1 = 0, q1 = 1;
    long double y = x;
    while (t.rows.size() < n) {
        if (y == 0.0L) {
            t.terminated = true;
            break;
        }
        long double inv = 1.0L / y;
        long double r = std::round(inv);
        bool near = std::fabs(inv - r) < 1e-12L;
        long double a = near ? r : std::floor(inv);
        if (a > 9.2e18L) {
            t.overflow = true;
            break;
        }
        if (!detail::push_convergent(t, static_cast<std::int64_t>(a), p1, q1, p0, q0)) break;
        if (near) {
            t.rows.back().near_integer = true;
            t.terminated = true;
            break;
        }
        y = inv - a;
    }
    return t;
}

// exact digit sequence with x supplied at extended precision for the error column
inline ConvergentTable convergents_from_digits(long double x, const std::vector<std::int64_t>& digits) {
    if (digits.size() > 40) throw Error(ErrorCode::invalid_argument, "at most 40 convergents");
    ConvergentTable t;
    t.x = x;
    std::int64_t p0 = 1, q0 = 0, p1 = 0, q1 = 1;
    for (std::int64_t a : digits) {
        if (a < 1) throw Error(ErrorCode::invalid_argument, "digits must be >= 1");
        if (!detail::push_convergent(t, a, p1, q1, p0, q0)) break;
    }
    return t;
}

inline ConvergentTable golden_convergents(std::size_t n) {
    return convergents_from_digits((std::sqrt(5.0L) - 1.0L) / 2.0L, std::vector<std::int64_t>(n, 1));
}

inline ConvergentTable sqrt2m1_convergents(std::size_t n) {
    return convergents_from_digits(std::sqrt(2.0L) - 1.0L, std::vector<std::int64_t>(n, 2));
}

struct FordCircle {
    std::int64_t p = 0;
    std::int64_t q = 1;
    double cx = 0.0, cy = 0.0, radius = 0.0;
};

inline FordCircle ford_circle(std::int64_t p, std::int64_t q) {
    if (q < 1) throw Error(ErrorCode::invalid_argument, "q must be >= 1");
    if (std::gcd(p, q) != 1) throw Error(ErrorCode::invalid_argument, "p and q must be coprime");
    double r = 1.0 / (2.0 * static_cast<double>(q) * static_cast<double>(q));
    return {p, q, static_cast<double>(p) / static_cast<double>(q), r, r};
}

struct FordTangency {
    bool exact = false;       // |p q' - p' q| = 1
    double distance_gap = 0;  // |center distance - (r + r')|
};

// center offsets formed from exact integer numerators
inline FordTangency ford_tangency(const FordCircle& a, const FordCircle& b) {
    __int128 det = static_cast<__int128>(a.p) * b.q - static_cast<__int128>(b.p) * a.q;
    long double qq = static_cast<long double>(a.q) * static_cast<long double>(b.q);
    long double dx = static_cast<long double>(det) / qq;
    __int128 num = static_cast<__int128>(b.q) * b.q - static_cast<__int128>(a.q) * a.q;
    long double dy = static_cast<long double>(num) / (2.0L * qq * qq);
    long double rs = 1.0L / (2.0L * a.q * a.q) + 1.0L / (2.0L * b.q * b.q);
    FordTangency t;
    t.exact = det == 1 || det == -1;
    t.distance_gap = static_cast<double>(std::fabs(std::sqrt(dx * dx + dy * dy) - rs));
    return t;
}

struct CurvatureRatioRow {
    std::size_t k = 0;
    long double ratio = 0;     // kappa_{k+1} / kappa_k
    long double q_ratio_sq = 0;
    std::int64_t a_next_sq = 0;
    bool identity_exact = false;  // kappa_{k+1} q_k^2 == kappa_k q_{k+1}^2 in integers
    bool gap_ok = false;          // |ratio - a^2| / a^2 <= 2/a + 1/a^2
};

// rows k = 0..n-1 using q_0 = 1 ahead of the convergent denominators
inline std::vector<CurvatureRatioRow> curvature_ratio_table(const ConvergentTable& t) {
    std::vector<std::int64_t> q{1};
    for (const auto& r : t.rows) q.push_back(r.q);
    std::vector<CurvatureRatioRow> out;
    for (std::size_t k = 0; k + 1 < q.size(); ++k) {
        CurvatureRatioRow row;
        row.k = k;
        __int128 q0 = q[k], q1 = q[k + 1];
        __int128 k0 = 2 * q0 * q0, k1 = 2 * q1 * q1;
        row.identity_exact = k1 * (q0 * q0) == k0 * (q1 * q1);
        row.ratio = static_cast<long double>(k1) / static_cast<long double>(k0);
        row.q_ratio_sq = static_cast<long double>(q1 * q1) / static_cast<long double>(q0 * q0);
        std::int64_t a = t.rows[k].a;
        row.a_next_sq = a * a;
        long double gap = std::fabs(row.ratio - static_cast<long double>(row.a_next_sq)) / static_cast<long double>(row.a_next_sq);
        row.gap_ok = gap <= 2.0L / a + 1.0L / (static_cast<long double>(a) * a) + 1e-15L;
        out.push_back(row);
    }
    return out;
}

} // namespace nestdyn
