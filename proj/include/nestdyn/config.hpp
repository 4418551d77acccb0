// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestdyn/dynamics.hpp"
#include "nestdyn/scenarios.hpp"

namespace nestdyn {

using json = nlohmann::json;

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> v{"concentric", "eccentric_circles", "tangent_circles", "nested_ellipses",
                                            "stadium",    "rounded_triangle",  "custom"};
    return v;
}

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> v{"orbit", "fit", "angular", "superexp", "lyapunov", "limit_set", "gnp"};
    return v;
}

struct CustomLevel {
    ShapeSpec body;
    ShapeSpec domain;
    std::optional<std::pair<Vec2, double>> hole;
    std::vector<Anchor> anchors;
};

struct OrbitConfig {
    std::vector<double> s0{0.05};
    std::vector<double> t0;
    std::size_t anchor = 0;
    std::size_t steps = 8;
    double log_switch_threshold = 1e-8;
};

struct FitConfig {
    double sigma = 1e-2;
    int scales = 5;
    std::size_t levels = 1;
};

struct GnpConfig {
    std::size_t samples = 128;
    std::size_t levels = 3;
};

struct LimitSetConfig {
    std::size_t ensemble = 64;
    std::size_t steps = 12;
    double s_max = 0.1;
    std::size_t ifs_points = 100000;
    std::size_t burn_in = 64;
};

struct ScenarioConfig {
    std::string scenario;
    ConcentricParams concentric;
    EccentricParams eccentric;
    TangentCirclesParams tangent;
    NestedEllipsesParams ellipses;
    StadiumParams stadium;
    RoundedTriangleParams triangle;
    std::vector<CustomLevel> custom;
    OrbitConfig orbit;
    FitConfig fit;
    GnpConfig gnp;
    LimitSetConfig limit_set;
    std::vector<std::string> experiments = experiment_names();
    std::string output = "out";
    std::uint64_t seed = 1;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> v)
        : Error(ErrorCode::config, join(v)), violations_(std::move(v)) {}
    const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
        return s;
    }
    std::vector<std::string> violations_;
};

namespace detail {

// Collects every violation instead of stopping at the first one.
class Reader {
public:
    std::vector<std::string> errors;

    bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
        if (!j.is_object()) {
            errors.push_back(path + ": expected an object");
            return false;
        }
        for (const auto& [k, v] : j.items())
            if (!allowed.count(k)) errors.push_back(path + ": unknown key \"" + k + "\"");
        return true;
    }

    template <class Pred>
    void number(const json& j, const std::string& key, const std::string& path, double& dst, Pred ok, const char* rule) {
        if (!j.contains(key)) return;
        const json& v = j.at(key);
        if (!v.is_number()) {
            errors.push_back(path + "." + key + ": expected a number");
            return;
        }
        double x = v.get<double>();
        if (!ok(x)) {
            errors.push_back(path + "." + key + ": must satisfy " + rule);
            return;
        }
        dst = x;
    }

    void positive(const json& j, const std::string& key, const std::string& path, double& dst) {
        number(j, key, path, dst, [](double x) { return x > 0.0; }, "> 0");
    }

    void nonneg(const json& j, const std::string& key, const std::string& path, double& dst) {
        number(j, key, path, dst, [](double x) { return x >= 0.0; }, ">= 0");
    }

    void lambda(const json& j, const std::string& path, double& dst) {
        number(j, "lambda", path, dst, [](double x) { return x > 0.0 && x < 1.0; }, "0 < lambda < 1");
    }

    template <class T>
    void count(const json& j, const std::string& key, const std::string& path, T& dst, std::uint64_t min = 0) {
        if (!j.contains(key)) return;
        const json& v = j.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < static_cast<std::int64_t>(min))) {
            errors.push_back(path + "." + key + ": expected an integer >= " + std::to_string(min));
            return;
        }
        dst = static_cast<T>(v.get<std::int64_t>());
    }

    void point(const json& j, const std::string& key, const std::string& path, Vec2& dst) {
        if (!j.contains(key)) return;
        const json& v = j.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            errors.push_back(path + "." + key + ": expected [x, y]");
            return;
        }
        dst = {v[0].get<double>(), v[1].get<double>()};
    }

    void numbers(const json& j, const std::string& key, const std::string& path, std::vector<double>& dst) {
        if (!j.contains(key)) return;
        const json& v = j.at(key);
        if (!v.is_array()) {
            errors.push_back(path + "." + key + ": expected an array of numbers");
            return;
        }
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) {
                errors.push_back(path + "." + key + ": expected an array of numbers");
                return;
            }
            out.push_back(x.get<double>());
        }
        dst = std::move(out);
    }

    std::optional<ShapeSpec> shape(const json& j, const std::string& path) {
        if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
            errors.push_back(path + ": expected a shape object with a \"kind\"");
            return std::nullopt;
        }
        std::string kind = j.at("kind").get<std::string>();
        std::size_t before = errors.size();
        if (kind == "circle") {
            CircleSpec s{{0, 0}, 1.0};
            object(j, path, {"kind", "center", "radius", "hole"});
            point(j, "center", path, s.center);
            positive(j, "radius", path, s.radius);
            if (errors.size() == before) return s;
        } else if (kind == "ellipse") {
            EllipseSpec s{{0, 0}, 1.0, 1.0};
            object(j, path, {"kind", "center", "a", "b", "hole"});
            point(j, "center", path, s.center);
            positive(j, "a", path, s.a);
            positive(j, "b", path, s.b);
            if (errors.size() == before) return s;
        } else if (kind == "stadium") {
            StadiumSpec s{};
            object(j, path, {"kind", "center", "radius", "flat_length", "smoothing", "hole"});
            point(j, "center", path, s.center);
            positive(j, "radius", path, s.radius);
            positive(j, "flat_length", path, s.flat_length);
            nonneg(j, "smoothing", path, s.smoothing);
            if (errors.size() == before) return s;
        } else if (kind == "rounded_triangle") {
            RoundedTriangleSpec s{};
            object(j, path, {"kind", "center", "height", "corner_radius", "smoothing", "hole"});
            point(j, "center", path, s.center);
            positive(j, "height", path, s.height);
            positive(j, "corner_radius", path, s.corner_radius);
            nonneg(j, "smoothing", path, s.smoothing);
            if (errors.size() == before) return s;
        } else if (kind == "conformal") {
            ConformalSpec s{};
            object(j, path, {"kind", "coefficients", "hole"});
            if (j.contains("coefficients")) {
                const json& c = j.at("coefficients");
                bool ok = c.is_array();
                std::vector<std::complex<double>> co;
                for (const auto& z : c) {
                    if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number())
                        co.emplace_back(z[0].get<double>(), z[1].get<double>());
                    else
                        ok = false;
                }
                if (!ok) errors.push_back(path + ".coefficients: expected [[re, im], ...]");
                s.coefficients = co;
            }
            if (errors.size() == before) return s;
        } else {
            errors.push_back(path + ".kind: unknown shape \"" + kind + "\"");
        }
        return std::nullopt;
    }
};

inline void read_params(Reader& r, const json& p, ScenarioConfig& c) {
    const std::string path = "params";
    const std::string& s = c.scenario;
    if (s == "concentric") {
        if (!r.object(p, path, {"inner_radius", "outer_radius"})) return;
        r.positive(p, "inner_radius", path, c.concentric.inner_radius);
        r.positive(p, "outer_radius", path, c.concentric.outer_radius);
    } else if (s == "eccentric_circles") {
        if (!r.object(p, path, {"radius", "domain_radius", "domain_center"})) return;
        r.positive(p, "radius", path, c.eccentric.radius);
        r.positive(p, "domain_radius", path, c.eccentric.domain_radius);
        r.point(p, "domain_center", path, c.eccentric.domain_center);
    } else if (s == "tangent_circles") {
        if (!r.object(p, path, {"lambda", "domain_radius", "domain_center", "domain_mode"})) return;
        r.lambda(p, path, c.tangent.lambda);
        r.positive(p, "domain_radius", path, c.tangent.domain_radius);
        r.point(p, "domain_center", path, c.tangent.domain_center);
        if (p.contains("domain_mode")) {
            const json& m = p.at("domain_mode");
            if (m == "fixed") c.tangent.mode = DomainMode::fixed;
            else if (m == "co_scaled") c.tangent.mode = DomainMode::co_scaled;
            else r.errors.push_back(path + ".domain_mode: expected \"fixed\" or \"co_scaled\"");
        }
    } else if (s == "nested_ellipses") {
        if (!r.object(p, path, {"a", "b", "lambda", "margin"})) return;
        r.positive(p, "a", path, c.ellipses.a);
        r.positive(p, "b", path, c.ellipses.b);
        r.lambda(p, path, c.ellipses.lambda);
        r.positive(p, "margin", path, c.ellipses.margin);
        if (c.ellipses.b > c.ellipses.a) r.errors.push_back(path + ": b must not exceed a (tangency at the major vertices)");
    } else if (s == "stadium") {
        if (!r.object(p, path, {"radius", "flat_length", "smoothing", "lambda", "margin"})) return;
        r.positive(p, "radius", path, c.stadium.radius);
        r.positive(p, "flat_length", path, c.stadium.flat_length);
        r.nonneg(p, "smoothing", path, c.stadium.smoothing);
        r.lambda(p, path, c.stadium.lambda);
        r.positive(p, "margin", path, c.stadium.margin);
    } else if (s == "rounded_triangle") {
        if (!r.object(p, path, {"height", "corner_radius", "smoothing", "lambda", "margin"})) return;
        r.positive(p, "height", path, c.triangle.height);
        r.positive(p, "corner_radius", path, c.triangle.corner_radius);
        r.nonneg(p, "smoothing", path, c.triangle.smoothing);
        r.lambda(p, path, c.triangle.lambda);
        r.positive(p, "margin", path, c.triangle.margin);
    } else if (s == "custom") {
        if (!r.object(p, path, {"levels"})) return;
        if (!p.contains("levels") || !p.at("levels").is_array() || p.at("levels").size() < 2) {
            r.errors.push_back(path + ".levels: expected an array of at least 2 levels");
            return;
        }
        for (std::size_t i = 0; i < p.at("levels").size(); ++i) {
            const json& L = p.at("levels")[i];
            std::string lp = path + ".levels[" + std::to_string(i) + "]";
            if (!r.object(L, lp, {"body", "domain", "anchors"})) continue;
            CustomLevel cl{CircleSpec{}, CircleSpec{}, std::nullopt, {}};
            auto b = L.contains("body") ? r.shape(L.at("body"), lp + ".body") : std::nullopt;
            auto d = L.contains("domain") ? r.shape(L.at("domain"), lp + ".domain") : std::nullopt;
            if (!L.contains("body")) r.errors.push_back(lp + ": missing \"body\"");
            if (!L.contains("domain")) r.errors.push_back(lp + ": missing \"domain\"");
            if (b) cl.body = *b;
            if (d) cl.domain = *d;
            if (L.contains("domain") && L.at("domain").is_object() && L.at("domain").contains("hole")) {
                const json& h = L.at("domain").at("hole");
                std::string hp = lp + ".domain.hole";
                if (r.object(h, hp, {"center", "radius"})) {
                    std::pair<Vec2, double> hole{{0, 0}, 0.0};
                    r.point(h, "center", hp, hole.first);
                    r.positive(h, "radius", hp, hole.second);
                    cl.hole = hole;
                }
            }
            if (L.contains("anchors")) {
                const json& A = L.at("anchors");
                if (!A.is_array()) r.errors.push_back(lp + ".anchors: expected an array");
                for (std::size_t a = 0; A.is_array() && a < A.size(); ++a) {
                    std::string ap = lp + ".anchors[" + std::to_string(a) + "]";
                    if (!r.object(A[a], ap, {"param", "tangency", "label"})) continue;
                    Anchor an{0.0, true, "a" + std::to_string(a)};
                    r.number(A[a], "param", ap, an.param, [](double x) { return std::isfinite(x); }, "finite");
                    if (A[a].contains("tangency")) {
                        if (A[a].at("tangency").is_boolean()) an.tangency = A[a].at("tangency").get<bool>();
                        else r.errors.push_back(ap + ".tangency: expected a boolean");
                    }
                    if (A[a].contains("label")) {
                        if (A[a].at("label").is_string()) an.label = A[a].at("label").get<std::string>();
                        else r.errors.push_back(ap + ".label: expected a string");
                    }
                    cl.anchors.push_back(an);
                }
            }
            c.custom.push_back(cl);
        }
    }
}

} // namespace detail

inline NestedScene build_scene(const ScenarioConfig& c) {
    const std::string& s = c.scenario;
    if (s == "concentric") return concentric_scene(c.concentric);
    if (s == "eccentric_circles") return eccentric_scene(c.eccentric);
    if (s == "tangent_circles") return tangent_circles_scene(c.tangent);
    if (s == "nested_ellipses") return nested_ellipses_scene(c.ellipses);
    if (s == "stadium") return stadium_scene(c.stadium);
    if (s == "rounded_triangle") return rounded_triangle_scene(c.triangle);
    if (s == "custom") {
        std::vector<Level> levels;
        for (const auto& cl : c.custom) {
            BoundaryCurve outer = make_curve(cl.domain);
            Domain om = cl.hole ? Domain(outer, cl.hole->first, cl.hole->second) : Domain(outer);
            levels.push_back(Level{make_curve(cl.body), std::move(om), cl.anchors});
        }
        return NestedScene("custom", std::move(levels));
    }
    throw Error(ErrorCode::config, "unknown scenario " + s);
}

// Restricted JSON profile: objects, arrays, numbers, strings, booleans; no comments.
inline ScenarioConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, false);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("syntax error: ") + e.what()});
    }
    detail::Reader r;
    ScenarioConfig c;
    if (!r.object(j, "config", {"scenario", "params", "orbit", "fit", "gnp", "limit_set", "experiments", "output", "seed"}))
        throw ConfigError(r.errors);
    if (!j.contains("scenario") || !j.at("scenario").is_string()) {
        r.errors.push_back("config.scenario: required string");
    } else {
        c.scenario = j.at("scenario").get<std::string>();
        const auto& names = scenario_names();
        if (std::find(names.begin(), names.end(), c.scenario) == names.end())
            r.errors.push_back("config.scenario: unknown scenario \"" + c.scenario + "\"");
        else if (j.contains("params"))
            detail::read_params(r, j.at("params"), c);
        else if (c.scenario == "custom")
            r.errors.push_back("params.levels: custom scenario needs explicit levels");
    }
    if (j.contains("orbit") && r.object(j.at("orbit"), "orbit", {"s0", "t0", "anchor", "steps", "log_switch_threshold"})) {
        const json& o = j.at("orbit");
        r.numbers(o, "s0", "orbit", c.orbit.s0);
        r.numbers(o, "t0", "orbit", c.orbit.t0);
        if (o.contains("t0") && !o.contains("s0")) c.orbit.s0.clear();
        r.count(o, "anchor", "orbit", c.orbit.anchor);
        r.count(o, "steps", "orbit", c.orbit.steps, 1);
        r.positive(o, "log_switch_threshold", "orbit", c.orbit.log_switch_threshold);
        if (c.orbit.s0.empty() && c.orbit.t0.empty()) r.errors.push_back("orbit: needs at least one s0 or t0");
    }
    if (j.contains("fit") && r.object(j.at("fit"), "fit", {"sigma", "scales", "levels"})) {
        r.positive(j.at("fit"), "sigma", "fit", c.fit.sigma);
        r.count(j.at("fit"), "scales", "fit", c.fit.scales, 2);
        r.count(j.at("fit"), "levels", "fit", c.fit.levels, 1);
    }
    if (j.contains("gnp") && r.object(j.at("gnp"), "gnp", {"samples", "levels"})) {
        r.count(j.at("gnp"), "samples", "gnp", c.gnp.samples, 16);
        r.count(j.at("gnp"), "levels", "gnp", c.gnp.levels, 1);
    }
    if (j.contains("limit_set") &&
        r.object(j.at("limit_set"), "limit_set", {"ensemble", "steps", "s_max", "ifs_points", "burn_in"})) {
        const json& l = j.at("limit_set");
        r.count(l, "ensemble", "limit_set", c.limit_set.ensemble, 64);
        r.count(l, "steps", "limit_set", c.limit_set.steps, 1);
        r.positive(l, "s_max", "limit_set", c.limit_set.s_max);
        r.count(l, "ifs_points", "limit_set", c.limit_set.ifs_points, 10000);
        r.count(l, "burn_in", "limit_set", c.limit_set.burn_in, 32);
    }
    if (j.contains("experiments")) {
        const json& e = j.at("experiments");
        if (!e.is_array()) {
            r.errors.push_back("config.experiments: expected an array of names");
        } else {
            c.experiments.clear();
            const auto& names = experiment_names();
            for (const auto& x : e) {
                if (!x.is_string() || std::find(names.begin(), names.end(), x.get<std::string>()) == names.end()) {
                    r.errors.push_back("config.experiments: unknown experiment " + x.dump());
                    continue;
                }
                std::string n = x.get<std::string>();
                if (std::find(c.experiments.begin(), c.experiments.end(), n) != c.experiments.end())
                    r.errors.push_back("config.experiments: duplicate \"" + n + "\"");
                else
                    c.experiments.push_back(n);
            }
        }
    }
    if (j.contains("output")) {
        if (j.at("output").is_string()) c.output = j.at("output").get<std::string>();
        else r.errors.push_back("config.output: expected a string");
    }
    if (j.contains("seed")) {
        if (j.at("seed").is_number_unsigned()) c.seed = j.at("seed").get<std::uint64_t>();
        else r.errors.push_back("config.seed: expected a non-negative integer");
    }
    if (r.errors.empty()) {
        try {
            NestedScene scene = build_scene(c);
            scene.level(0);
            if (!scene.level_count() || *scene.level_count() > 1) scene.level(1);
            bool orbits = false;
            for (const auto& e : c.experiments) orbits = orbits || e == "orbit" || e == "superexp" || e == "lyapunov";
            if (orbits && !c.orbit.s0.empty() && c.orbit.anchor >= scene.level(0).anchors.size())
                r.errors.push_back("orbit.anchor: level 0 has " + std::to_string(scene.level(0).anchors.size()) +
                                   " anchors");
        } catch (const Error& e) {
            r.errors.push_back("params: " + std::string(e.what()));
        }
    }
    if (!r.errors.empty()) throw ConfigError(r.errors);
    return c;
}

// JSON with sorted keys and %.17g numbers; non-finite values become null.
inline void write_json(const json& j, std::ostream& os, int indent = 2, int depth = 0) {
    auto pad = [&](int d) { os << std::string(static_cast<std::size_t>(indent * d), ' '); };
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            break;
        }
        os << "{\n";
        std::size_t i = 0;
        for (const auto& [k, v] : j.items()) {
            pad(depth + 1);
            os << json(k).dump() << ": ";
            write_json(v, os, indent, depth + 1);
            os << (++i < j.size() ? ",\n" : "\n");
        }
        pad(depth);
        os << '}';
        break;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            break;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            pad(depth + 1);
            write_json(j[i], os, indent, depth + 1);
            os << (i + 1 < j.size() ? ",\n" : "\n");
        }
        pad(depth);
        os << ']';
        break;
    }
    case json::value_t::number_float: {
        double v = j.get<double>();
        if (std::isfinite(v)) os << format_number(v);
        else os << "null";
        break;
    }
    default:
        os << j.dump();
    }
    if (depth == 0) os << '\n';
}

} // namespace nestdyn
