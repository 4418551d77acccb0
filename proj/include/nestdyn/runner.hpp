// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "nestdyn/config.hpp"
#include "nestdyn/logifs.hpp"
#include "nestdyn/tangency.hpp"

namespace nestdyn {

inline constexpr const char* report_schema = "nestdyn.report/1";

struct ExperimentResult {
    std::string status = "pass";  // pass | fail | skipped | error
    std::vector<std::string> files;
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
};

struct RunReport {
    std::string scenario;
    std::map<std::string, ExperimentResult> experiments;
    std::vector<std::string> warnings;
    json scene_checks;
    double wall_time = 0.0;  // seconds; not serialized
    int exit_code = 0;
};

namespace detail {

inline json vec_json(Vec2 p) { return json::array({p.x, p.y}); }

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

class RunContext {
public:
    RunContext(const ScenarioConfig& cfg, std::filesystem::path out)
        : cfg(cfg), out(std::move(out)), scene(build_scene(cfg)),
          fit_opt{cfg.fit.sigma, cfg.fit.scales, 4}, alpha(fitted_alpha_provider(scene, fit_opt)) {}

    const ScenarioConfig& cfg;
    std::filesystem::path out;
    NestedScene scene;
    FitOptions fit_opt;
    AlphaProvider alpha;

    std::size_t levels_available(std::size_t want) const {
        return scene.level_count() ? std::min(want, *scene.level_count()) : want;
    }

    void write(ExperimentResult& r, const std::string& name, const json& j) const {
        std::ofstream f(out / name, std::ios::binary);
        write_json(j, f);
        r.files.push_back(name);
    }

    OrbitOptions orbit_options() const { return OrbitOptions{cfg.orbit.log_switch_threshold, alpha}; }

    std::vector<OrbitStart> starts() const {
        std::vector<OrbitStart> v;
        for (double s : cfg.orbit.s0) v.push_back(OrbitStart::geodesic(s, cfg.orbit.anchor));
        for (double t : cfg.orbit.t0) v.push_back(OrbitStart::param(t));
        return v;
    }

    std::size_t orbit_steps() const {
        if (scene.level_count()) return std::min(cfg.orbit.steps, *scene.level_count() - 1);
        return cfg.orbit.steps;
    }

    // tangencies and fits per level, shared by fit and angular
    struct AnchorFit {
        std::size_t k = 0, anchor = 0;
        std::optional<QuadraticFit> fit;
        std::optional<std::size_t> tangency;  // index into tangencies
        std::optional<std::string> error;
    };
    struct TangencyData {
        std::vector<TangencyPoint> tangencies;
        std::vector<AnchorFit> fits;
    };

    const TangencyData& tangency_data() {
        if (tdata_) return *tdata_;
        TangencyData d;
        std::size_t K = levels_available(cfg.fit.levels + 1);
        for (std::size_t k = 0; k + 1 < K; ++k) {
            const Level& L = scene.level(k);
            const Level& N = scene.level(k + 1);
            std::size_t first = d.tangencies.size();
            auto pts = find_tangencies(L.body, L.domain, N.body, std::nullopt, k);
            d.tangencies.insert(d.tangencies.end(), pts.begin(), pts.end());
            if (pts.empty()) continue;
            double tol = 1e-6 * std::max(1.0, L.body.diameter());
            for (std::size_t a = 0; a < L.anchors.size(); ++a) {
                AnchorFit af{k, a, std::nullopt, std::nullopt, std::nullopt};
                Vec2 pa = L.body.position(L.anchors[a].param);
                std::optional<double> af_formula;
                for (std::size_t i = first; i < d.tangencies.size(); ++i) {
                    if (distance(d.tangencies[i].p, pa) < tol) {
                        af.tangency = i;
                        try {
                            af_formula = alpha_beta_formula(d.tangencies[i]).alpha;
                        } catch (const Error&) {
                        }
                    }
                }
                try {
                    af.fit = fit_local_quadratic(scene, k, a, fit_opt, af_formula);
                } catch (const Error& e) {
                    af.error = e.what();
                }
                d.fits.push_back(std::move(af));
            }
        }
        tdata_ = std::move(d);
        return *tdata_;
    }

private:
    std::optional<TangencyData> tdata_;
};

inline void run_orbit(RunContext& ctx, ExperimentResult& r) {
    auto starts = ctx.starts();
    for (std::size_t i = 0; i < starts.size(); ++i) {
        Orbit o = iterate_orbit(ctx.scene, starts[i], ctx.orbit_steps(), ctx.orbit_options());
        std::string name = i == 0 ? "orbit.csv" : "orbit_" + std::to_string(i) + ".csv";
        std::ofstream f(ctx.out / name, std::ios::binary);
        write_orbit_csv(o, f);
        r.files.push_back(name);
        if (o.truncation) r.violations.push_back(name + " truncated: " + *o.truncation);
    }
}

inline json tangency_json(const TangencyPoint& tp, const std::optional<QuadraticFit>& fit) {
    json j;
    j["k"] = tp.k;
    j["p"] = vec_json(tp.p);
    j["t"] = tp.t;
    j["t_next"] = tp.t_next;
    j["gap"] = tp.gap;
    j["normal_misalignment"] = tp.normal_misalignment;
    j["kappa_k"] = tp.kappa_k;
    j["kappa_k1"] = tp.kappa_k1;
    j["d"] = opt_json(tp.d);
    j["R_measured"] = opt_json(tp.R_measured);
    j["R_paper_relation"] = opt_json(tp.R_paper_relation);
    j["g1_predicted"] = opt_json(tp.g1_predicted);
    try {
        auto ab = alpha_beta_formula(tp);
        j["alpha_formula"] = ab.alpha;
        j["beta_formula"] = ab.beta;
        if (fit) j["deviation"] = ab.alpha != 0.0 ? json(std::abs(fit->alpha - ab.alpha) / std::abs(ab.alpha)) : json(nullptr);
    } catch (const Error& e) {
        j["alpha_formula"] = nullptr;
        j["formula_error"] = e.what();
    }
    j["alpha_fit"] = fit ? json(fit->alpha) : json(nullptr);
    j["g1_fit"] = fit ? json(fit->g1) : json(nullptr);
    j["residual"] = fit ? json(fit->residual) : json(nullptr);
    return j;
}

inline void run_fit(RunContext& ctx, ExperimentResult& r) {
    const auto& td = ctx.tangency_data();
    if (td.tangencies.empty()) {
        r.status = "skipped";
        r.warnings.push_back("no tangency found");
        return;
    }
    json tj = json::array();
    for (std::size_t i = 0; i < td.tangencies.size(); ++i) {
        std::optional<QuadraticFit> f;
        for (const auto& af : td.fits)
            if (af.tangency == i && af.fit) f = af.fit;
        tj.push_back(tangency_json(td.tangencies[i], f));
    }
    ctx.write(r, "tangency.json", json{{"tangencies", tj}});

    json fj = json::array();
    for (const auto& af : td.fits) {
        const Anchor& an = ctx.scene.level(af.k).anchors[af.anchor];
        json a;
        a["level"] = af.k;
        a["anchor"] = af.anchor;
        a["label"] = an.label;
        a["declared_tangency"] = an.tangency;
        a["tangency_found"] = af.tangency.has_value();
        std::string where = "level " + std::to_string(af.k) + " anchor " + an.label;
        if (af.error) {
            a["error"] = *af.error;
            r.violations.push_back(where + ": " + *af.error);
            fj.push_back(a);
            continue;
        }
        const QuadraticFit& f = *af.fit;
        a["g1"] = f.g1;
        a["alpha"] = f.alpha;
        a["g1_all"] = f.g1_all;
        a["alpha_all"] = f.alpha_all;
        a["g1_plus"] = f.g1_plus;
        a["g1_minus"] = f.g1_minus;
        a["alpha_plus"] = f.alpha_plus;
        a["alpha_minus"] = f.alpha_minus;
        a["residual"] = f.residual;
        a["sigma_max"] = f.sigma_max;
        a["sigma_min"] = f.sigma_min;
        a["alpha_stability"] = f.alpha_stability;
        a["deviation_stability"] = opt_json(f.deviation_stability);
        json ps = json::array();
        for (const auto& s : f.per_scale)
            ps.push_back({{"sigma", s.sigma}, {"g1", s.g1}, {"alpha", s.alpha}, {"residual", s.residual},
                          {"deviation", opt_json(s.deviation)}});
        a["per_scale"] = ps;
        if (af.tangency) a["g1_predicted"] = opt_json(ctx.tangency_data().tangencies[*af.tangency].g1_predicted);
        if (an.tangency) {
            a["regime"] = "quadratic";
            if (!af.tangency) r.warnings.push_back(where + ": declared tangency not detected");
            if (!(std::abs(f.g1) <= 1e-6))
                r.violations.push_back(where + ": |g1| = " + format_number(std::abs(f.g1)) + " exceeds 1e-6");
            if (!(f.alpha_stability <= 0.01))
                r.violations.push_back(where + ": alpha unstable across finest scales (" +
                                       format_number(f.alpha_stability) + ")");
            if (f.deviation_stability && !(*f.deviation_stability <= 0.01))
                r.violations.push_back(where + ": deviation unstable across finest scales (" +
                                       format_number(*f.deviation_stability) + ")");
        } else {
            a["regime"] = "linear";
            if (!(std::abs(f.g1) >= 1e-2))
                r.violations.push_back(where + ": linear coefficient " + format_number(f.g1) + " below 1e-2");
        }
        fj.push_back(a);
    }
    ctx.write(r, "fit.json", json{{"anchors", fj}});
}

inline void run_angular(RunContext& ctx, ExperimentResult& r) {
    const auto& td = ctx.tangency_data();
    if (td.tangencies.empty()) {
        r.status = "skipped";
        r.warnings.push_back("no tangency found");
        return;
    }
    json arr = json::array();
    for (const auto& af : td.fits) {
        if (!af.tangency || !af.fit) continue;
        const TangencyPoint& tp = td.tangencies[*af.tangency];
        const Level& L = ctx.scene.level(af.k);
        std::string where = "level " + std::to_string(af.k) + " anchor " + L.anchors[af.anchor].label;
        AngularSlope sl = measure_angular_slope(L.body, L.domain, L.anchors[af.anchor].param);
        double want = 2.0 * tp.kappa_k;
        double rel = std::abs(sl.slope - want) / want;
        AngularFit bf = fit_angular_quadratic(ctx.scene, af.k, af.anchor, af.fit->alpha, tp.kappa_k, tp.kappa_k1, ctx.fit_opt);
        json a{{"level", af.k},
               {"anchor", af.anchor},
               {"slope", sl.slope},
               {"slope_plus", sl.slope_plus},
               {"slope_minus", sl.slope_minus},
               {"slope_expected", want},
               {"slope_relative_error", rel},
               {"beta_fit", bf.degenerate ? json(nullptr) : json(bf.beta_fit)},
               {"linear_fit", bf.degenerate ? json(nullptr) : json(bf.linear)},
               {"beta_predicted", bf.beta_predicted},
               {"beta_relative_error", opt_json(bf.relative_error)},
               {"degenerate", bf.degenerate}};
        arr.push_back(a);
        if (!(rel <= 0.005))
            r.violations.push_back(where + ": dtheta/ds = " + format_number(sl.slope) + ", expected " + format_number(want));
        if (bf.degenerate)
            r.violations.push_back(where + ": theta vanishes identically near the anchor; beta cannot be fitted");
        else if (!(bf.relative_error && *bf.relative_error <= 0.02))
            r.violations.push_back(where + ": beta fit " + format_number(bf.beta_fit) + " vs predicted " +
                                   format_number(bf.beta_predicted));
    }
    ctx.write(r, "angular.json", json{{"anchors", arr}});
}

inline Orbit certificate_orbit(RunContext& ctx) {
    auto st = ctx.starts();
    return iterate_orbit(ctx.scene, st.front(), ctx.orbit_steps(), ctx.orbit_options());
}

inline void run_superexp(RunContext& ctx, ExperimentResult& r) {
    Orbit o = certificate_orbit(ctx);
    SuperExpCertificate c = superexp_certificate(o);
    json j{{"u", c.u},
           {"ratios", c.ratios},
           {"rho", c.rho},
           {"C", c.C},
           {"q", c.q},
           {"r", c.r},
           {"bound_holds", c.bound_holds},
           {"conclusive", c.conclusive},
           {"pass", c.pass},
           {"reason", c.reason},
           {"truncation", o.truncation ? json(*o.truncation) : json(nullptr)}};
    if (o.switch_check) {
        j["switch_check"] = {{"step", o.switch_check->step},
                             {"u_log", o.switch_check->u_log},
                             {"u_geometric", opt_json(o.switch_check->u_geometric)}};
    }
    ctx.write(r, "superexp.json", j);
    if (!c.pass) r.violations.push_back(c.reason.empty() ? "certificate failed" : c.reason);
}

inline void run_lyapunov(RunContext& ctx, ExperimentResult& r) {
    Orbit o = certificate_orbit(ctx);
    LyapunovReport rep = lyapunov_check(ctx.scene, o);
    json j{{"applicable", rep.applicable},
           {"reason", rep.reason},
           {"d1", rep.d1},
           {"d2", rep.d2},
           {"d", rep.d},
           {"monotone", rep.monotone},
           {"strict", rep.strict},
           {"first_violation", rep.first_violation ? json(*rep.first_violation) : json(nullptr)},
           {"truncation", o.truncation ? json(*o.truncation) : json(nullptr)}};
    ctx.write(r, "lyapunov.json", j);
    if (!rep.applicable) {
        r.status = "skipped";
        r.warnings.push_back("hypothesis not met: " + rep.reason);
        return;
    }
    if (!rep.monotone)
        r.violations.push_back("thickness increases at step " + std::to_string(*rep.first_violation));
    else if (!rep.strict)
        r.violations.push_back("thickness not strictly decreasing");
}

inline void run_limit_set(RunContext& ctx, ExperimentResult& r) {
    const Level& L0 = ctx.scene.level(0);
    std::vector<std::size_t> tang;
    for (std::size_t a = 0; a < L0.anchors.size(); ++a)
        if (L0.anchors[a].tangency) tang.push_back(a);
    const auto& lc = ctx.cfg.limit_set;
    std::vector<OrbitStart> starts;
    if (tang.empty()) {
        for (std::size_t i = 0; i < lc.ensemble; ++i) starts.push_back(OrbitStart::param(two_pi * i / lc.ensemble));
    } else {
        std::size_t per = (lc.ensemble + tang.size() - 1) / tang.size();
        for (std::size_t i = 0; i < lc.ensemble; ++i) {
            std::size_t j = i / tang.size();
            double s = lc.s_max * (2.0 * (j + 0.5) / per - 1.0);
            starts.push_back(OrbitStart::geodesic(s, tang[i % tang.size()]));
        }
    }
    std::size_t steps = ctx.scene.level_count() ? std::min(lc.steps, *ctx.scene.level_count() - 1) : lc.steps;
    LimitSetSample ls = limit_set_sample(ctx.scene, starts, steps, ctx.orbit_options());
    {
        std::ofstream f(ctx.out / "limit_set.csv", std::ios::binary);
        f << "member,x,y,mode,anchor,error\n";
        for (std::size_t i = 0; i < ls.members.size(); ++i) {
            const auto& m = ls.members[i];
            f << i << ',' << (m.point ? format_number(m.point->x) : "") << ',' << (m.point ? format_number(m.point->y) : "")
              << ',' << to_string(m.mode) << ',' << (m.anchor ? std::to_string(*m.anchor) : "") << ','
              << (m.error ? json(*m.error).dump() : "") << '\n';
        }
        r.files.push_back("limit_set.csv");
    }
    json dim;
    dim["branches"] = tang.size();
    dim["similarity"] = tang.empty() ? json(nullptr) : json(similarity_dimension(tang.size()));
    if (!tang.empty()) {
        std::vector<double> alphas;
        json aj = json::array();
        for (std::size_t a : tang) {
            auto v = ctx.alpha(0, a);
            aj.push_back(opt_json(v));
            if (v) alphas.push_back(*v);
        }
        dim["alphas"] = aj;
        try {
            if (alphas.size() != tang.size()) throw Error(ErrorCode::accuracy, "fitted alpha missing for some anchor");
            LogIFS ifs = branch_maps(alphas, 0.5);
            AttractorSample s = chaos_game(ifs, lc.ifs_points, ctx.cfg.seed, lc.burn_in);
            auto [lo, hi] = resolved_octaves(s.points.size());
            DimensionEstimate d = box_counting_dimension(s.points);
            DimensionEstimate dr = box_counting_dimension(s.points, lo, hi);
            dim["box"] = d.box;
            dim["stderr"] = d.stderr_;
            dim["scales"] = d.widths;
            dim["zero_variance"] = d.zero_variance;
            dim["box_resolved"] = dr.box;
            dim["resolved_octaves"] = json::array({lo, hi});
            dim["standard_ratio"] = ifs.standard_ratio();
        } catch (const Error& e) {
            dim["box"] = nullptr;
            dim["error"] = std::string("log IFS unavailable: ") + e.what();
        }
    }
    ctx.write(r, "dimension.json", dim);

    std::size_t failed = 0;
    for (const auto& m : ls.members) failed += m.error ? 1 : 0;
    if (failed) r.violations.push_back(std::to_string(failed) + " ensemble members truncated");
    if (!ls.inside_c0) r.violations.push_back("accumulation point outside C_0");
    if (tang.empty()) {
        r.warnings.push_back("no tangency anchors; accumulation set recorded without a target");
        return;
    }
    std::vector<Vec2> targets;
    for (std::size_t a : tang) targets.push_back(L0.body.position(L0.anchors[a].param));
    AnchorCoverage cov = anchor_coverage(ls, targets, 1e-6);
    if (cov.max_distance > 1e-6)
        r.violations.push_back("accumulation points up to " + format_number(cov.max_distance) + " from the nearest anchor");
    for (std::size_t i = 0; i < cov.hits.size(); ++i)
        if (cov.hits[i] == 0) r.violations.push_back("anchor " + L0.anchors[tang[i]].label + " never reached");
}

inline json gnp_json(std::size_t k, const GnpReport& g) {
    json v = json::array();
    for (const auto& x : g.violations)
        v.push_back({{"kind", x.kind},
                     {"component", x.component == Component::outer ? "outer" : "hole"},
                     {"on_body", x.on_body},
                     {"param", x.param},
                     {"point", vec_json(x.point)},
                     {"ray_param", x.ray_param}});
    return {{"level", k}, {"pass", g.pass}, {"samples", g.samples}, {"violations", v}};
}

inline void run_gnp(RunContext& ctx, ExperimentResult& r) {
    json arr = json::array();
    for (std::size_t k = 0; k < ctx.levels_available(ctx.cfg.gnp.levels); ++k) {
        const Level& L = ctx.scene.level(k);
        GnpReport g = check_gnp(L.body, L.domain, ctx.cfg.gnp.samples);
        arr.push_back(gnp_json(k, g));
        if (!g.pass)
            r.violations.push_back("level " + std::to_string(k) + ": " + std::to_string(g.violations.size()) +
                                   " normal-property violations (first: " + g.violations.front().kind + ")");
    }
    ctx.write(r, "gnp.json", json{{"levels", arr}});
}

inline json scene_check_json(const SceneCheck& sc) {
    json arr = json::array();
    for (const auto& lc : sc.levels)
        arr.push_back({{"level", lc.k},
                       {"body_in_domain", lc.body_in_domain},
                       {"nesting", opt_json(lc.nesting)},
                       {"nesting_near", opt_json(lc.nesting_near)},
                       {"domain_nesting", opt_json(lc.domain_nesting)},
                       {"gnp_pass", lc.gnp.pass},
                       {"violations", lc.violations}});
    return {{"ok", sc.ok}, {"levels", arr}};
}

} // namespace detail

inline json report_json(const RunReport& rep) {
    json ex = json::object();
    for (const auto& [name, r] : rep.experiments)
        ex[name] = {{"status", r.status}, {"files", r.files}, {"violations", r.violations}, {"warnings", r.warnings}};
    json manifest = json::array();
    for (const auto& [name, r] : rep.experiments)
        for (const auto& f : r.files) manifest.push_back(f);
    manifest.push_back("report.json");
    std::sort(manifest.begin(), manifest.end());
    return {{"schema", report_schema},
            {"scenario", rep.scenario},
            {"experiments", ex},
            {"manifest", manifest},
            {"scene_checks", rep.scene_checks},
            {"warnings", rep.warnings},
            {"exit_code", rep.exit_code}};
}

// Runs the requested experiments, writing outputs into `out`. Exit code 0 or 1; config errors surface as ConfigError.
inline RunReport run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out) {
    auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out);
    RunReport rep;
    rep.scenario = cfg.scenario;
    detail::RunContext ctx(cfg, out);

    std::size_t K = ctx.levels_available(3);
    SceneCheck sc = validate_scene(ctx.scene, K, 64);
    rep.scene_checks = detail::scene_check_json(sc);
    for (const auto& lc : sc.levels)
        for (const auto& v : lc.violations) rep.warnings.push_back("level " + std::to_string(lc.k) + ": " + v);

    using Fn = void (*)(detail::RunContext&, ExperimentResult&);
    const std::map<std::string, Fn> table{{"orbit", detail::run_orbit},       {"fit", detail::run_fit},
                                          {"angular", detail::run_angular},   {"superexp", detail::run_superexp},
                                          {"lyapunov", detail::run_lyapunov}, {"limit_set", detail::run_limit_set},
                                          {"gnp", detail::run_gnp}};
    for (const auto& name : cfg.experiments) {
        ExperimentResult r;
        try {
            table.at(name)(ctx, r);
            if (!r.violations.empty()) r.status = "fail";
        } catch (const Error& e) {
            r.status = "error";
            r.violations.push_back(e.what());
        }
        if (r.status == "fail" || r.status == "error") rep.exit_code = 1;
        rep.experiments[name] = std::move(r);
    }
    {
        std::ofstream f(out / "report.json", std::ios::binary);
        write_json(report_json(rep), f);
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace nestdyn
