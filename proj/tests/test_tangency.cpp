// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <numbers>

#include "nestdyn/scenarios.hpp"
#include "nestdyn/tangency.hpp"

using namespace nestdyn;

TEST(Tangency, TangentCirclesContact) {
    auto scene = tangent_circles_scene();
    const auto& L0 = scene.level(0);
    auto pts = find_tangencies(L0.body, L0.domain, scene.level(1).body);
    ASSERT_EQ(pts.size(), 1u);
    const auto& tp = pts[0];
    EXPECT_NEAR(tp.p.x, 0.0, 1e-10);
    EXPECT_NEAR(tp.p.y, 1.0, 1e-12);
    EXPECT_NEAR(tp.kappa_k, 1.0, 1e-12);
    EXPECT_NEAR(tp.kappa_k1, 2.0, 1e-12);
    EXPECT_NEAR(*tp.d, 1.0, 1e-12);
    EXPECT_NEAR(*tp.R_measured, 2.0, 1e-12);
    EXPECT_NEAR(*tp.R_paper_relation, 0.0, 1e-12);
    EXPECT_NEAR(*tp.g1_predicted, 1.0, 1e-12);
    EXPECT_LT(tp.normal_misalignment, 1e-8);
    auto ab = alpha_beta_formula(tp);
    EXPECT_NEAR(ab.alpha, 0.125, 1e-12);
    EXPECT_NEAR(ab.beta, 0.125, 1e-12);
}

TEST(Tangency, NoContact) {
    auto c = make_curve(CircleSpec{{0, 0}, 1.0});
    EXPECT_TRUE(find_tangencies(c, make_curve(CircleSpec{{0, 0}, 0.5})).empty());
    EXPECT_TRUE(find_tangencies(c, c).empty());
}

TEST(Tangency, EllipseVertices) {
    auto scene = nested_ellipses_scene();
    const auto& L0 = scene.level(0);
    auto pts = find_tangencies(L0.body, L0.domain, scene.level(1).body);
    ASSERT_EQ(pts.size(), 2u);
    for (const auto& tp : pts) {
        EXPECT_NEAR(std::abs(tp.p.x), 2.0, 1e-12);
        EXPECT_NEAR(tp.p.y, 0.0, 1e-8);
        EXPECT_NEAR(tp.kappa_k, 2.0, 1e-9);
        EXPECT_NEAR(tp.kappa_k1, 8.0, 1e-9);
        EXPECT_NEAR(*tp.d, 0.5, 1e-12);
        // outer vertex of the (2.5, 1.5) ellipse: R = b^2 / a
        EXPECT_NEAR(*tp.R_measured, 0.9, 1e-9);
    }
}

TEST(Tangency, StadiumTips) {
    auto scene = stadium_scene();
    const auto& L0 = scene.level(0);
    auto pts = find_tangencies(L0.body, L0.domain, scene.level(1).body);
    ASSERT_EQ(pts.size(), 2u);
    for (const auto& tp : pts) {
        EXPECT_NEAR(tp.p.y, 0.0, 1e-8);
        EXPECT_NEAR(tp.kappa_k, 1.0, 1e-9);
        EXPECT_NEAR(tp.kappa_k1, 2.0, 1e-9);
    }
}

TEST(Tangency, FormulaRejectsBadRadius) {
    EXPECT_THROW(alpha_beta_formula(1.0, 2.0, 1.0, 0.0), Error);
    EXPECT_THROW(alpha_beta_formula(1.0, 2.0, 1.0, -1.0), Error);
}

TEST(Tangency, UniformBounds) {
    auto b = alpha_bounds(1.0, 2.0, 1.0, 1.0, 1.0, 2.0, 2.0);
    EXPECT_NEAR(b.alpha_min, 0.0625, 1e-15);
    EXPECT_NEAR(b.alpha_max, 0.125, 1e-15);
    EXPECT_THROW(alpha_bounds(1.0, 2.0, 0.0, 1.0, 1.0, 2.0, 2.0), Error);

    auto scene = nested_ellipses_scene();
    std::vector<TangencyPoint> all;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& L = scene.level(k);
        auto pts = find_tangencies(L.body, L.domain, scene.level(k + 1).body, std::nullopt, k);
        all.insert(all.end(), pts.begin(), pts.end());
    }
    auto eb = alpha_bounds(all);
    EXPECT_EQ(eb.alphas.size(), 6u);
    EXPECT_TRUE(eb.all_within);
}

// In the canonical configuration the transition is an isometry in geodesic
// coordinates, so the fitted linear part is 1 and the quadratic part vanishes.
TEST(Tangency, FitCanonicalIsIsometry) {
    auto f = fit_local_quadratic(tangent_circles_scene(), 0, 0, {}, 0.125);
    ASSERT_EQ(f.per_scale.size(), 5u);
    EXPECT_NEAR(f.sigma_min, 1e-2 / 16, 1e-18);
    EXPECT_NEAR(f.g1, 1.0, 1e-9);
    EXPECT_NEAR(f.alpha, 0.0, 1e-6);
    EXPECT_LT(f.residual, 1e-12);
    ASSERT_TRUE(f.per_scale.back().deviation.has_value());
    EXPECT_NEAR(*f.per_scale.back().deviation, 1.0, 1e-5);
}

TEST(Tangency, FitMatchesPredictedLinearPart) {
    auto scene = nested_ellipses_scene();
    const auto& L0 = scene.level(0);
    auto pts = find_tangencies(L0.body, L0.domain, scene.level(1).body);
    ASSERT_FALSE(pts.empty());
    auto f = fit_local_quadratic(scene, 0, 0);
    EXPECT_NEAR(f.g1, *pts[0].g1_predicted, 1e-6);
    // symmetric about the vertex: odd map, no quadratic term
    EXPECT_NEAR(f.alpha, 0.0, 1e-6);
}

TEST(Tangency, FitRejectsBadOptions) {
    FitOptions o;
    o.scales = 1;
    EXPECT_THROW(fit_local_quadratic(tangent_circles_scene(), 0, 0, o), Error);
    EXPECT_THROW(fit_local_quadratic(tangent_circles_scene(), 0, 3), Error);
}

TEST(Tangency, AngularSlopeConcentricDomain) {
    auto scene = tangent_circles_scene();
    const auto& L0 = scene.level(0);
    auto a = measure_angular_slope(L0.body, L0.domain, std::numbers::pi / 2);
    EXPECT_NEAR(a.slope, 0.0, 1e-9);
    auto af = fit_angular_quadratic(scene, 0, 0, 0.125, 1.0, 2.0);
    EXPECT_TRUE(af.degenerate);
    EXPECT_NEAR(af.beta_predicted, 0.125, 1e-15);
}

TEST(Tangency, AngularSlopeOffsetDomain) {
    TangentCirclesParams p;
    p.domain_center = {0.0, -0.2};
    auto scene = tangent_circles_scene(p);
    const auto& L0 = scene.level(0);
    auto a = measure_angular_slope(L0.body, L0.domain, std::numbers::pi / 2);
    EXPECT_GT(a.slope, 0.0);
    EXPECT_NEAR(a.slope_plus, a.slope_minus, 1e-6);
}

TEST(Tangency, SuperExpCertificate) {
    std::vector<double> u{3.0};
    for (int k = 0; k < 8; ++k) u.push_back(2.0 * u.back() + std::log(8.0));
    auto c = superexp_certificate(std::span<const double>(u));
    EXPECT_TRUE(c.conclusive);
    EXPECT_TRUE(c.pass) << c.reason;
    EXPECT_TRUE(c.bound_holds);
    EXPECT_NEAR(c.q, std::exp(-3.0) / 8.0, 1e-15);
    EXPECT_GT(c.rho, 0.0);
    EXPECT_LT(c.rho, 1.0);

    std::vector<double> lin;
    for (int k = 0; k < 9; ++k) lin.push_back(3.0 + k);
    auto l = superexp_certificate(std::span<const double>(lin));
    EXPECT_TRUE(l.conclusive);
    EXPECT_FALSE(l.pass);

    std::vector<double> few{1.0, 2.0, 4.0};
    auto f = superexp_certificate(std::span<const double>(few));
    EXPECT_FALSE(f.conclusive);
    EXPECT_FALSE(f.pass);
}

TEST(Tangency, FittedAlphaProviderCaches) {
    auto prov = fitted_alpha_provider(tangent_circles_scene());
    auto a = prov(0, 0);
    ASSERT_TRUE(a.has_value());
    EXPECT_EQ(*a, *prov(0, 0));
    EXPECT_FALSE(prov(0, 5).has_value());
}
