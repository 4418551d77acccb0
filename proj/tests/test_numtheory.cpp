// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "nestdyn/numtheory.hpp"

using namespace nestdyn;

TEST(Gauss, Map) {
    auto h = gauss_map(0.5);
    EXPECT_EQ(*h.digit, 2);
    EXPECT_EQ(h.value, 0.0);
    double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto gg = gauss_map(g);
    EXPECT_EQ(*gg.digit, 1);
    EXPECT_NEAR(gg.value, g, 1e-15);
    auto s = gauss_map(2.0 / 7.0);
    EXPECT_EQ(*s.digit, 3);
    EXPECT_NEAR(s.value, 0.5, 1e-15);
    EXPECT_FALSE(gauss_map(0.0).digit.has_value());
    EXPECT_THROW(gauss_map(1.0), Error);
}

TEST(Convergents, Golden) {
    auto t = golden_convergents(40);
    ASSERT_EQ(t.rows.size(), 40u);
    std::int64_t f0 = 1, f1 = 1;
    for (const auto& r : t.rows) {
        EXPECT_EQ(r.a, 1);
        EXPECT_EQ(r.q, f1);
        std::int64_t f2 = f0 + f1;
        f0 = f1;
        f1 = f2;
        EXPECT_LE(r.error * r.q * r.q, 1.0L);
    }
    auto fl = convergents((std::sqrt(5.0) - 1.0) / 2.0, 6);
    for (std::size_t i = 0; i < fl.rows.size(); ++i) EXPECT_EQ(fl.rows[i].q, t.rows[i].q);
}

TEST(Convergents, Rational) {
    auto t = convergents(2.0 / 7.0, 10);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0].a, 3);
    EXPECT_EQ(t.rows[0].p, 1);
    EXPECT_EQ(t.rows[0].q, 3);
    EXPECT_EQ(t.rows[1].a, 2);
    EXPECT_EQ(t.rows[1].p, 2);
    EXPECT_EQ(t.rows[1].q, 7);
    EXPECT_TRUE(t.terminated);
    EXPECT_THROW(convergents(0.3, 41), Error);
}

TEST(Convergents, Invariants) {
    for (double x : {0.1234567, 0.987654321, std::sqrt(2.0) - 1.0, std::numbers::pi - 3.0}) {
        auto t = convergents(x, 30);
        std::int64_t pp = 0, qp = 1;
        for (const auto& r : t.rows) {
            EXPECT_EQ(std::gcd(r.p, r.q), 1);
            EXPECT_LE(r.error * r.q * r.q, 1.0L);
            __int128 det = static_cast<__int128>(pp) * r.q - static_cast<__int128>(r.p) * qp;
            EXPECT_TRUE(det == 1 || det == -1);
            pp = r.p;
            qp = r.q;
        }
    }
}

TEST(Ford, Circles) {
    auto a = ford_circle(1, 2);
    EXPECT_EQ(a.cx, 0.5);
    EXPECT_EQ(a.cy, 0.125);
    EXPECT_EQ(a.radius, 0.125);
    auto z = ford_circle(0, 1);
    EXPECT_EQ(z.cy, 0.5);
    auto b = ford_circle(1, 3);
    auto t = ford_tangency(b, a);
    EXPECT_TRUE(t.exact);
    EXPECT_LE(t.distance_gap, 1e-15);
    double d2 = std::pow(1.0 / 6, 2) + std::pow(1.0 / 8 - 1.0 / 18, 2);
    EXPECT_NEAR(d2, 0.0326003, 1e-7);
    EXPECT_THROW(ford_circle(2, 4), Error);
    EXPECT_THROW(ford_circle(1, 0), Error);
    EXPECT_FALSE(ford_tangency(ford_circle(1, 2), ford_circle(1, 5)).exact);
}

TEST(Ford, ConsecutiveConvergentsTangent) {
    auto t = sqrt2m1_convergents(30);
    for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
        auto r = ford_tangency(ford_circle(t.rows[i].p, t.rows[i].q), ford_circle(t.rows[i + 1].p, t.rows[i + 1].q));
        EXPECT_TRUE(r.exact);
        EXPECT_LE(r.distance_gap, 1e-15);
    }
}

TEST(CurvatureRatio, Table) {
    auto rows = curvature_ratio_table(golden_convergents(20));
    ASSERT_EQ(rows.size(), 20u);
    EXPECT_EQ(rows[0].ratio, 1.0L);  // a_1^2
    for (const auto& r : rows) {
        EXPECT_TRUE(r.identity_exact);
        EXPECT_EQ(r.ratio, r.q_ratio_sq);
        EXPECT_TRUE(r.gap_ok);
    }
    const long double phi2 = (3.0L + std::sqrt(5.0L)) / 2.0L;
    EXPECT_LT(std::fabs(rows[11].ratio - phi2), 1e-4L);
    EXPECT_GT(std::fabs(rows[10].ratio - phi2), 1e-4L);

    auto mixed = curvature_ratio_table(convergents_from_digits(0.0L, {1, 5, 1, 1}));
    EXPECT_GE(mixed[1].ratio, 25.0L);
    EXPECT_LE(mixed[1].ratio, 36.0L);
    EXPECT_EQ(curvature_ratio_table(convergents_from_digits(0.0L, {7}))[0].ratio, 49.0L);
}
