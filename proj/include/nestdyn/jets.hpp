// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "nestdyn/tangency.hpp"

namespace nestdyn {

using cplx = std::complex<double>;

// a_0 + a_1 z + ... + a_N z^N
struct ComplexJet {
    std::vector<cplx> a;

    std::size_t order() const { return a.empty() ? 0 : a.size() - 1; }
    cplx operator[](std::size_t i) const { return i < a.size() ? a[i] : cplx{}; }

    static ComplexJet identity(std::size_t N) {
        ComplexJet j{std::vector<cplx>(N + 1)};
        if (N >= 1) j.a[1] = 1.0;
        return j;
    }
};

namespace detail {

inline std::vector<cplx> truncated_mul(const std::vector<cplx>& x, const std::vector<cplx>& y, std::size_t N) {
    std::vector<cplx> r(N + 1);
    for (std::size_t i = 0; i < x.size() && i <= N; ++i) {
        if (x[i] == cplx{}) continue;
        for (std::size_t j = 0; j < y.size() && i + j <= N; ++j) r[i + j] += x[i] * y[j];
    }
    return r;
}

} // namespace detail

// f o g truncated at order N; needs g(0) = 0
inline ComplexJet compose(const ComplexJet& f, const ComplexJet& g, std::size_t N) {
    if (g[0] != cplx{}) throw Error(ErrorCode::invalid_argument, "inner jet must vanish at 0");
    std::vector<cplx> acc(N + 1);
    for (std::size_t n = f.a.size(); n-- > 0;) {
        acc = detail::truncated_mul(acc, g.a, N);
        acc[0] += f.a[n];
    }
    return {acc};
}

// formal inverse h with f(h(w)) = w, solved coefficient by coefficient
inline ComplexJet inverse(const ComplexJet& f, std::size_t N) {
    if (f[0] != cplx{}) throw Error(ErrorCode::inversion, "jet must vanish at 0");
    if (f[1] == cplx{}) throw Error(ErrorCode::inversion, "linear coefficient is zero");
    ComplexJet h{std::vector<cplx>(N + 1)};
    h.a[1] = 1.0 / f[1];
    for (std::size_t n = 2; n <= N; ++n) {
        cplx c = compose(f, h, n)[n];
        h.a[n] = -c / f[1];
    }
    return h;
}

// psi^{-1} o phi for jets tangent to the identity
inline ComplexJet jet_compose_inverse(const ComplexJet& phi, const ComplexJet& psi, std::size_t N) {
    if (N < 2) throw Error(ErrorCode::invalid_argument, "jet order must be at least 2");
    if (psi[1] == cplx{}) throw Error(ErrorCode::inversion, "psi is not formally invertible");
    for (const ComplexJet* j : {&phi, &psi})
        if ((*j)[0] != cplx{} || (*j)[1] != cplx{1.0})
            throw Error(ErrorCode::hypothesis_violation, "jets must be tangent to the identity");
    return compose(inverse(psi, N), phi, N);
}

struct ConformalCurvature {
    double kappa = 0.0;
    double printed_form = 0.0;  // Im(z phi''/phi') / |phi'|, kept as a diagnostic
};

inline ConformalCurvature conformal_curvature(const std::vector<cplx>& coeffs, double theta) {
    cplx z = std::polar(1.0, theta);
    cplx d1, d2, zn = 1.0;
    for (std::size_t n = 1; n < coeffs.size(); ++n) {
        double dn = static_cast<double>(n);
        d1 += dn * coeffs[n] * zn;
        if (n >= 2) d2 += dn * (dn - 1.0) * coeffs[n] * zn / z;
        zn *= z;
    }
    double m = std::abs(d1);
    if (m < 1e-14) throw Error(ErrorCode::singular_parametrization, "phi' vanishes");
    cplx w = z * d2 / d1;
    return {(1.0 + w.real()) / m, w.imag() / m};
}

struct TransitionJetCheck {
    double geodesic_g1 = 0.0;
    double geodesic_alpha = 0.0;
    double chart_g1 = 0.0;
    double chart_alpha = 0.0;
    double chart_scale = 1.1;
    double alpha_reparam = 0.0;            // chart alpha mapped back to arclength units
    std::optional<double> relative_gap;    // |alpha_reparam - geodesic_alpha| / |geodesic_alpha|
    bool linear_vanishes = false;          // |geodesic g1| <= 1e-6
    bool linear_regime = false;
};

// Fits the same transition in geodesic coordinates and in a scaled tangent-line chart.
inline TransitionJetCheck transition_jet_check(const NestedScene& scene, std::size_t k, std::size_t anchor,
                                               const FitOptions& opt = {}, double chart_scale = 1.1) {
    TransitionJetCheck r;
    r.chart_scale = chart_scale;
    auto chart = [chart_scale](const BoundaryCurve& c, double tp, double t) {
        return chart_scale * dot(c.position(t) - c.position(tp), c.tangent(tp));
    };
    auto gg = sample_transition(scene, k, anchor, opt);
    auto gc = sample_transition(scene, k, anchor, opt, chart);
    auto [g1, a] = detail::fit_linear_quadratic(gg.back());
    auto [c1, ca] = detail::fit_linear_quadratic(gc.back());
    r.geodesic_g1 = g1;
    r.geodesic_alpha = a;
    r.chart_g1 = c1;
    r.chart_alpha = ca;
    r.alpha_reparam = chart_scale * ca;
    if (a != 0.0) r.relative_gap = std::abs(r.alpha_reparam - a) / std::abs(a);
    r.linear_vanishes = std::abs(g1) <= 1e-6;
    r.linear_regime = !r.linear_vanishes;
    return r;
}

} // namespace nestdyn
