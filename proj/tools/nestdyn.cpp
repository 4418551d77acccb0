// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nestdyn/numtheory.hpp"
#include "nestdyn/quadmodel.hpp"
#include "nestdyn/runner.hpp"

using namespace nestdyn;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError({"cannot read " + path});
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// named scenario with defaults, or a config file
ScenarioConfig load(const std::string& config, const std::string& scenario) {
    if (!config.empty()) return parse_config(read_file(config));
    return parse_config(json{{"scenario", scenario}}.dump());
}

int scenario_run(const std::string& config, const std::string& out) {
    ScenarioConfig cfg = parse_config(read_file(config));
    std::string dir = out.empty() ? cfg.output : out;
    RunReport rep = run_scenario(cfg, dir);
    for (const auto& [name, r] : rep.experiments) {
        std::printf("%-10s %s\n", name.c_str(), r.status.c_str());
        for (const auto& v : r.violations) std::printf("    %s\n", v.c_str());
        for (const auto& w : r.warnings) std::printf("    warning: %s\n", w.c_str());
    }
    for (const auto& w : rep.warnings) std::printf("scene warning: %s\n", w.c_str());
    std::printf("wall time %.3f s, outputs in %s\n", rep.wall_time, dir.c_str());
    return rep.exit_code;
}

int tangency_fit(const ScenarioConfig& cfg, std::size_t level, std::size_t anchor) {
    NestedScene scene = build_scene(cfg);
    const Level& L = scene.level(level);
    auto pts = find_tangencies(L.body, L.domain, scene.level(level + 1).body, std::nullopt, level);
    if (anchor >= L.anchors.size()) throw Error(ErrorCode::invalid_argument, "anchor index out of range");
    std::optional<double> af;
    json tj = json::array();
    for (const auto& tp : pts) {
        tj.push_back(detail::tangency_json(tp, std::nullopt));
        if (distance(tp.p, L.body.position(L.anchors[anchor].param)) < 1e-6 * std::max(1.0, L.body.diameter()))
            af = alpha_beta_formula(tp).alpha;
    }
    FitOptions opt{cfg.fit.sigma, cfg.fit.scales, 4};
    QuadraticFit f = fit_local_quadratic(scene, level, anchor, opt, af);
    json ps = json::array();
    for (const auto& s : f.per_scale)
        ps.push_back({{"sigma", s.sigma}, {"g1", s.g1}, {"alpha", s.alpha}, {"residual", s.residual},
                      {"deviation", detail::opt_json(s.deviation)}});
    json out{{"tangencies", tj},
             {"fit",
              {{"label", f.label},
               {"g1", f.g1},
               {"alpha", f.alpha},
               {"residual", f.residual},
               {"alpha_stability", f.alpha_stability},
               {"alpha_formula", detail::opt_json(af)},
               {"per_scale", ps}}}};
    write_json(out, std::cout);
    bool declared = L.anchors[anchor].tangency;
    return declared && !(std::abs(f.g1) <= 1e-6) ? 1 : 0;
}

int ifs_sample(std::size_t m, std::vector<double> alphas, double ratio, std::size_t n, std::uint64_t seed,
               std::size_t burn_in, const std::string& out) {
    LogIFS ifs;
    if (!alphas.empty()) {
        if (m != 0 && m != alphas.size()) throw Error(ErrorCode::invalid_argument, "--m disagrees with --alphas");
        ifs = branch_maps(alphas, ratio);
    } else {
        // fixed points spread evenly over [0, 1]
        if (m == 0) throw Error(ErrorCode::invalid_argument, "need --m or --alphas");
        std::vector<double> p;
        for (std::size_t i = 0; i < m; ++i) p.push_back(m == 1 ? 0.0 : static_cast<double>(i) / (m - 1));
        ifs = LogIFS::from_fixed_points(p, ratio);
    }
    AttractorSample s = chaos_game(ifs, n, seed, burn_in);
    std::filesystem::create_directories(out);
    {
        std::ofstream f(std::filesystem::path(out) / "points.csv", std::ios::binary);
        for (double u : s.points) f << format_number(u) << '\n';
    }
    DimensionEstimate d = box_counting_dimension(s.points);
    auto [lo, hi] = resolved_octaves(s.points.size());
    DimensionEstimate dr = box_counting_dimension(s.points, lo, hi);
    json j{{"similarity", similarity_dimension(ifs.size())},
           {"box", d.box},
           {"stderr", d.stderr_},
           {"scales", d.widths},
           {"zero_variance", d.zero_variance},
           {"box_resolved", dr.box},
           {"stderr_resolved", dr.stderr_},
           {"resolved_octaves", json::array({lo, hi})},
           {"ratio", ifs.ratio},
           {"standard_ratio", ifs.standard_ratio()},
           {"seed", seed}};
    std::ofstream f(std::filesystem::path(out) / "dimension.json", std::ios::binary);
    write_json(j, f);
    write_json(j, std::cout);
    return 0;
}

int toy_verify(const std::vector<double>& alphas, double r, double s0, const std::vector<int>& itinerary, std::size_t n) {
    ToyConfig c{alphas, r, s0, itinerary.empty() ? std::vector<int>{1} : itinerary};
    ToyOrbit o = toy_orbit(c, n);
    std::printf("k,i_k,s_k,u_k,bound_k,closed_form_k\n");
    for (const auto& st : o.steps)
        std::printf("%zu,%d,%s,%s,%s,%s\n", st.k, st.branch, format_number(st.s).c_str(),
                    st.u ? format_number(*st.u).c_str() : "", format_number(st.bound.value).c_str(),
                    format_number(st.closed_form).c_str());
    std::fprintf(stderr, "max relative log error %.3g, bound violations %zu\n", o.max_rel_error, o.bound_violations);
    return o.bound_violations == 0 && o.max_rel_error <= 1e-12 && o.interval_ok ? 0 : 1;
}

int ford_table(const std::string& x, std::size_t n) {
    ConvergentTable t;
    if (x == "golden") t = golden_convergents(n);
    else if (x == "sqrt2m1") t = sqrt2m1_convergents(n);
    else t = convergents(std::stod(x), n);
    std::printf("k,a_k,p_k,q_k,kappa_k,ratio,err,err_times_q2\n");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        std::string ratio;
        if (i + 1 < t.rows.size())
            ratio = format_number(static_cast<double>(static_cast<long double>(t.rows[i + 1].q) * t.rows[i + 1].q /
                                                      (static_cast<long double>(r.q) * r.q)));
        std::printf("%zu,%lld,%lld,%lld,%s,%s,%s,%s\n", r.k, static_cast<long long>(r.a), static_cast<long long>(r.p),
                    static_cast<long long>(r.q), format_number(static_cast<double>(r.kappa)).c_str(), ratio.c_str(),
                    format_number(static_cast<double>(r.error)).c_str(),
                    format_number(static_cast<double>(r.error * r.q * r.q)).c_str());
    }
    if (t.overflow) std::fprintf(stderr, "stopped: 64-bit overflow guard\n");
    if (!t.rows.empty() && t.rows.back().near_integer) std::fprintf(stderr, "stopped: digit from a near-integer value\n");
    return 0;
}

int gnp_check(const ScenarioConfig& cfg, std::size_t samples, std::size_t levels) {
    NestedScene scene = build_scene(cfg);
    std::size_t K = scene.level_count() ? std::min(levels, *scene.level_count()) : levels;
    json arr = json::array();
    bool ok = true;
    for (std::size_t k = 0; k < K; ++k) {
        const Level& L = scene.level(k);
        GnpReport g = check_gnp(L.body, L.domain, samples);
        ok = ok && g.pass;
        arr.push_back(detail::gnp_json(k, g));
    }
    write_json(json{{"levels", arr}, {"pass", ok}}, std::cout);
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nested convex boundary dynamics toolkit"};
    app.require_subcommand(1);

    auto* scen = app.add_subcommand("scenario", "run configured experiments");
    auto* scen_run = scen->add_subcommand("run", "run a scenario config");
    std::string config, out;
    scen_run->add_option("--config", config, "config file")->required();
    scen_run->add_option("--out", out, "output directory (overrides the config)");
    scen->require_subcommand(1);

    auto* tang = app.add_subcommand("tangency", "tangency detection and local fits");
    auto* tang_fit = tang->add_subcommand("fit", "fit the transition at one anchor");
    std::string scenario = "tangent_circles";
    std::size_t level = 0, anchor = 0;
    tang_fit->add_option("--config", config, "config file");
    tang_fit->add_option("--scenario", scenario, "named scenario with default parameters");
    tang_fit->add_option("--level", level);
    tang_fit->add_option("--anchor", anchor);
    tang->require_subcommand(1);

    auto* ifs = app.add_subcommand("ifs", "log-coordinate IFS");
    auto* ifs_s = ifs->add_subcommand("sample", "chaos-game sample and dimension estimates");
    std::size_t m = 0, n_points = 100000, burn_in = 64;
    std::vector<double> alphas;
    double ratio = 0.5;
    std::uint64_t seed = 1;
    ifs_s->add_option("--m", m, "branch count");
    ifs_s->add_option("--alphas", alphas, "branch coefficients")->delimiter(',');
    ifs_s->add_option("--ratio", ratio, "contraction ratio (1/2 is the log-IFS of the dynamics)");
    ifs_s->add_option("--n", n_points);
    ifs_s->add_option("--seed", seed);
    ifs_s->add_option("--burn-in", burn_in);
    ifs_s->add_option("--out", out)->required();
    ifs->require_subcommand(1);

    auto* toy = app.add_subcommand("toy", "quadratic branching model");
    auto* toy_v = toy->add_subcommand("verify", "iterate and compare with the closed form");
    double r = 0.4, s0 = 0.25;
    std::vector<int> itinerary;
    std::size_t steps = 10;
    toy_v->add_option("--alphas", alphas)->delimiter(',')->required();
    toy_v->add_option("--r", r);
    toy_v->add_option("--s0", s0);
    toy_v->add_option("--itinerary", itinerary, "1-based branch labels, cycled")->delimiter(',');
    toy_v->add_option("--n", steps);
    toy->require_subcommand(1);

    auto* ford = app.add_subcommand("ford", "continued fractions and Ford circles");
    auto* ford_t = ford->add_subcommand("table", "convergent table");
    std::string x = "golden";
    std::size_t nconv = 20;
    ford_t->add_option("--x", x, "decimal in (0,1), golden or sqrt2m1");
    ford_t->add_option("--n", nconv);
    ford->require_subcommand(1);

    auto* gnp = app.add_subcommand("gnp", "normal-property checker");
    auto* gnp_c = gnp->add_subcommand("check", "sample the normal property level by level");
    std::size_t samples = 256, levels = 1;
    gnp_c->add_option("--config", config);
    gnp_c->add_option("--scenario", scenario);
    gnp_c->add_option("--samples", samples);
    gnp_c->add_option("--levels", levels);
    gnp->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*scen_run) return scenario_run(config, out);
        if (*tang_fit) return tangency_fit(load(config, scenario), level, anchor);
        if (*ifs_s) return ifs_sample(m, alphas, ratio, n_points, seed, burn_in, out);
        if (*toy_v) return toy_verify(alphas, r, s0, itinerary, steps);
        if (*ford_t) return ford_table(x, nconv);
        if (*gnp_c) return gnp_check(load(config, scenario), samples, levels);
    } catch (const ConfigError& e) {
        for (const auto& v : e.violations()) std::fprintf(stderr, "config: %s\n", v.c_str());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return e.code() == ErrorCode::invalid_argument || e.code() == ErrorCode::domain ? 2 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
    return 0;
}
