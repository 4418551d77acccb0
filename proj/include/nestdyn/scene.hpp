// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nestdyn/transport.hpp"

namespace nestdyn {

struct Anchor {
    double param = 0.0;
    bool tangency = true;  // false: reference point only (e.g. a flat midpoint)
    std::string label;
};

struct Level {
    BoundaryCurve body;
    Domain domain;
    std::vector<Anchor> anchors;
};

class NestedScene {
public:
    using Generator = std::function<Level(std::size_t)>;

    NestedScene(std::string name, std::vector<Level> levels)
        : name_(std::move(name)), cache_(std::make_shared<Cache>()) {
        if (levels.empty()) throw Error(ErrorCode::invalid_argument, "scene needs at least one level");
        count_ = levels.size();
        for (std::size_t k = 0; k < levels.size(); ++k) cache_->levels.emplace(k, std::move(levels[k]));
    }

    // self-similar scene: levels produced on demand
    NestedScene(std::string name, Generator gen)
        : name_(std::move(name)), gen_(std::move(gen)), cache_(std::make_shared<Cache>()) {}

    const std::string& name() const { return name_; }
    bool self_similar() const { return static_cast<bool>(gen_); }
    std::optional<std::size_t> level_count() const { return count_; }

    const Level& level(std::size_t k) const {
        std::lock_guard<std::mutex> lock(cache_->mu);
        auto it = cache_->levels.find(k);
        if (it != cache_->levels.end()) return it->second;
        if (!gen_) throw Error(ErrorCode::invalid_argument, "level index beyond scene");
        return cache_->levels.emplace(k, gen_(k)).first->second;
    }

private:
    struct Cache {
        std::mutex mu;
        std::map<std::size_t, Level> levels;
    };

    std::string name_;
    Generator gen_;
    std::optional<std::size_t> count_;
    std::shared_ptr<Cache> cache_;
};

struct LevelCheck {
    std::size_t k = 0;
    double body_in_domain = 0.0;  // min margin of C_k inside Omega_k
    std::optional<double> nesting;         // min margin of C_{k+1} inside C_k away from anchors
    std::optional<double> nesting_near;    // min margin next to declared tangencies
    std::optional<double> domain_nesting;  // min margin of dOmega_k inside closure of Omega_{k+1}
    GnpReport gnp;
    std::vector<std::string> violations;
};

struct SceneCheck {
    bool ok = true;
    std::vector<LevelCheck> levels;
};

// Sampled version of the nesting / containment / normal-property invariants for levels 0..K-1.
inline SceneCheck validate_scene(const NestedScene& scene, std::size_t K, std::size_t gnp_samples = 128) {
    SceneCheck out;
    for (std::size_t k = 0; k < K; ++k) {
        const Level& L = scene.level(k);
        LevelCheck lc;
        lc.k = k;
        lc.body_in_domain = containment_margin(L.body, L.domain, 512);
        if (!(lc.body_in_domain > 1e-9)) lc.violations.push_back("body not strictly inside domain");
        lc.gnp = check_gnp(L.body, L.domain, gnp_samples);
        if (!lc.gnp.pass)
            lc.violations.push_back("normal property fails at " + std::to_string(lc.gnp.violations.size()) + " samples");
        bool has_next = !scene.level_count() || k + 1 < *scene.level_count();
        if (has_next) {
            const Level& N = scene.level(k + 1);
            double excl = 1e-3 * L.body.diameter();
            double far = std::numeric_limits<double>::infinity(), near = far;
            for (int i = 0; i < 512; ++i) {
                Vec2 p = N.body.position(two_pi * i / 512.0);
                double m = L.body.inside_margin(p);
                bool close = false;
                for (const auto& a : L.anchors)
                    if (a.tangency && distance(p, L.body.position(a.param)) < excl) close = true;
                (close ? near : far) = std::min(close ? near : far, m);
            }
            lc.nesting = far;
            if (std::isfinite(near)) lc.nesting_near = near;
            if (!(far > 1e-9)) lc.violations.push_back("next body not strictly nested");
            if (std::isfinite(near) && near < -1e-9) lc.violations.push_back("next body crosses at a tangency");
            double dm = std::numeric_limits<double>::infinity();
            for (int i = 0; i < 512; ++i)
                dm = std::min(dm, N.domain.inside_margin(L.domain.outer().position(two_pi * i / 512.0)));
            lc.domain_nesting = dm;
            if (dm < -1e-9) lc.violations.push_back("domain not contained in next domain");
        }
        if (!lc.violations.empty()) out.ok = false;
        out.levels.push_back(std::move(lc));
    }
    return out;
}

} // namespace nestdyn
