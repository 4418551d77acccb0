// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "nestdyn/runner.hpp"

using namespace nestdyn;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> violations_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("nestdyn_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(Config, Defaults) {
    auto c = parse_config(R"({"scenario": "tangent_circles"})");
    EXPECT_EQ(c.fit.sigma, 1e-2);
    EXPECT_EQ(c.orbit.log_switch_threshold, 1e-8);
    EXPECT_EQ(c.gnp.samples, 128u);
    EXPECT_EQ(c.experiments.size(), 7u);
    EXPECT_EQ(c.tangent.lambda, 0.5);
}

TEST(Config, LambdaRange) {
    auto v = violations_of(R"({"scenario": "stadium", "params": {"lambda": 1.5}})");
    ASSERT_EQ(v.size(), 1u);
    EXPECT_TRUE(any_contains(v, "0 < lambda < 1"));
}

TEST(Config, UnknownKey) {
    auto v = violations_of(R"({"scenario": "tangent_circles", "alpha_override": 0.1})");
    EXPECT_TRUE(any_contains(v, "alpha_override"));
}

TEST(Config, AllViolationsReported) {
    auto v = violations_of(R"({"scenario": "stadium", "params": {"lambda": 0, "radius": -1, "bogus": 1},
                               "fit": {"scales": 1}, "experiments": ["orbit", "nope"]})");
    EXPECT_EQ(v.size(), 5u);
    EXPECT_TRUE(any_contains(v, "bogus"));
    EXPECT_TRUE(any_contains(v, "radius"));
    EXPECT_TRUE(any_contains(v, "scales"));
    EXPECT_TRUE(any_contains(v, "nope"));
}

TEST(Config, SyntaxErrorPosition) {
    auto v = violations_of("{\n  \"scenario\": \"stadium\",\n  oops\n}");
    ASSERT_EQ(v.size(), 1u);
    EXPECT_TRUE(any_contains(v, "line 3"));
    EXPECT_TRUE(any_contains(violations_of("{\"scenario\": \"stadium\" // no comments\n}"), "syntax error"));
}

TEST(Config, BuilderPreconditions) {
    auto v = violations_of(R"({"scenario": "stadium", "params": {"smoothing": 5.0}})");
    EXPECT_TRUE(any_contains(v, "smoothing"));
    auto c = violations_of(R"({"scenario": "custom"})");
    EXPECT_FALSE(c.empty());
}

TEST(Config, JsonNumbers) {
    std::ostringstream ss;
    write_json(json{{"b", 0.1}, {"a", std::nan("")}, {"c", 1}}, ss);
    EXPECT_EQ(ss.str(), "{\n  \"a\": null,\n  \"b\": 0.10000000000000001,\n  \"c\": 1\n}\n");
}

TEST(Runner, ConcentricFitSkipped) {
    auto c = parse_config(R"({"scenario": "concentric", "experiments": ["fit", "orbit"]})");
    auto dir = scratch("concentric");
    auto rep = run_scenario(c, dir);
    EXPECT_EQ(rep.exit_code, 0);
    EXPECT_EQ(rep.experiments.at("fit").status, "skipped");
    EXPECT_TRUE(any_contains(rep.experiments.at("fit").warnings, "no tangency found"));
    EXPECT_EQ(rep.experiments.at("orbit").status, "pass");
    EXPECT_TRUE(fs::exists(dir / "orbit.csv"));
    EXPECT_TRUE(fs::exists(dir / "report.json"));
}

TEST(Runner, Reproducible) {
    auto c = parse_config(R"({"scenario": "nested_ellipses", "experiments": ["orbit", "fit", "gnp", "superexp"]})");
    auto a = scratch("repro_a"), b = scratch("repro_b");
    auto ra = run_scenario(c, a);
    run_scenario(c, b);
    auto manifest = report_json(ra)["manifest"];
    EXPECT_EQ(manifest.size(), 6u);  // orbit.csv, tangency.json, fit.json, gnp.json, superexp.json, report.json
    for (const auto& f : manifest) EXPECT_EQ(slurp(a / f.get<std::string>()), slurp(b / f.get<std::string>())) << f;
    EXPECT_EQ(ra.experiments.size(), 4u);
}

TEST(Runner, TangentCirclesAlphaFormula) {
    auto c = parse_config(R"({"scenario": "tangent_circles", "experiments": ["fit"]})");
    auto dir = scratch("tc");
    run_scenario(c, dir);
    auto t = json::parse(slurp(dir / "tangency.json"));
    EXPECT_DOUBLE_EQ(t["tangencies"][0]["alpha_formula"].get<double>(), 0.125);
}

TEST(Runner, PuncturedGnpFails) {
    auto c = parse_config(R"({"scenario": "custom", "experiments": ["gnp"], "gnp": {"samples": 256, "levels": 1},
      "params": {"levels": [
        {"body": {"kind": "circle", "radius": 1.0},
         "domain": {"kind": "circle", "radius": 3.0, "hole": {"center": [2.0, 0.0], "radius": 0.3}}},
        {"body": {"kind": "circle", "radius": 0.5}, "domain": {"kind": "circle", "radius": 3.0}}]}})");
    auto dir = scratch("punctured");
    auto rep = run_scenario(c, dir);
    EXPECT_EQ(rep.exit_code, 1);
    EXPECT_EQ(rep.experiments.at("gnp").status, "fail");
    EXPECT_NE(slurp(dir / "gnp.json").find("disconnected_ray"), std::string::npos);
}
