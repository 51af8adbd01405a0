#ifndef EYELINE_SIM_SCENARIO_HPP
#define EYELINE_SIM_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "eyeline/core.hpp"
#include "eyeline/gaze/one_euro.hpp"
#include "eyeline/layout/config_json.hpp"
#include "eyeline/layout/frame.hpp"
#include "eyeline/layout/grid.hpp"

namespace eyeline::sim {

using json = nlohmann::json;

/// Ground truth for one member over [start, end): looks at member `target`
/// (an index into join order) or at no one.
struct ScriptSegment {
    TimeMs start = 0;
    TimeMs end = 0;
    std::optional<std::size_t> target;

    friend bool operator==(const ScriptSegment&, const ScriptSegment&) = default;
};

using Script = std::vector<ScriptSegment>;

struct NetConfig {
    double latency_ms = 4.0;
    double jitter_ms = 2.0; // uniform in [-jitter, +jitter]
    double loss = 0.0;      // per-message drop probability
};

struct Scenario {
    std::size_t members = 5;
    TimeMs duration_ms = 60000;
    TimeMs tick_ms = 16;
    std::vector<Script> scripts;
    double noise_sigma = 0.0; // px, per axis
    NetConfig net;
    std::uint64_t seed = 1;
    TimeMs dwell_ms = 100;
    gaze::FilterParams filter;
    layout::LayoutMode mode = layout::LayoutMode::directional;
    layout::RenderConfig render;
    std::optional<std::size_t> observe; // host observes this member when set
    TimeMs drain_ticks = 20;            // server keeps ticking after clients stop

    void validate() const {
        if (members < 2) throw ConfigError("scenario needs at least two members");
        if (tick_ms <= 0 || duration_ms <= 0) throw ConfigError("tick and duration must be positive");
        if (!(net.loss >= 0.0 && net.loss <= 1.0)) throw ConfigError("loss must be within [0, 1]");
        if (net.latency_ms < 0.0 || net.jitter_ms < 0.0) throw ConfigError("latency and jitter must be >= 0");
        if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
        if (scripts.size() != members) throw ConfigError("need one script per member");
        if (observe && *observe >= members) throw ConfigError("observed member out of range");
        filter.validate();
        for (std::size_t m = 0; m < members; ++m) {
            TimeMs at = 0;
            for (const auto& seg : scripts[m]) {
                if (seg.start != at || seg.end <= seg.start)
                    throw ConfigError("script " + std::to_string(m) + " does not tile the duration");
                if (seg.target && (*seg.target >= members || *seg.target == m))
                    throw ConfigError("script " + std::to_string(m) + " has an invalid target");
                at = seg.end;
            }
            if (at != duration_ms) throw ConfigError("script " + std::to_string(m) + " does not cover the duration");
        }
    }
};

/// Random conversation scripts: segment lengths uniform in [min_ms, max_ms]
/// rounded to ticks, target uniform over the other members, or nobody with
/// probability `none_prob`. Consecutive segments always differ.
inline std::vector<Script> random_scripts(std::size_t members, TimeMs duration_ms, TimeMs tick_ms,
                                          TimeMs min_ms, TimeMs max_ms, double none_prob, std::uint64_t seed) {
    if (members < 2 || min_ms <= 0 || max_ms < min_ms) throw ConfigError("bad script generator parameters");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<TimeMs> len(min_ms / tick_ms, std::max<TimeMs>(1, max_ms / tick_ms));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Script> out(members);
    for (std::size_t m = 0; m < members; ++m) {
        TimeMs at = 0;
        std::optional<std::size_t> prev;
        bool first = true;
        while (at < duration_ms) {
            const TimeMs end = std::min(duration_ms, at + len(rng) * tick_ms);
            std::optional<std::size_t> tgt;
            do {
                if (u(rng) < none_prob) {
                    tgt.reset();
                } else {
                    auto k = std::uniform_int_distribution<std::size_t>(0, members - 2)(rng);
                    tgt = k >= m ? k + 1 : k;
                }
            } while (!first && tgt == prev && members > 2);
            out[m].push_back({at, end, tgt});
            prev = tgt;
            first = false;
            at = end;
        }
    }
    return out;
}

inline void to_json(json& j, const ScriptSegment& s) {
    j = {{"start", s.start}, {"end", s.end}, {"target", s.target ? json(*s.target) : json(nullptr)}};
}

inline void from_json(const json& j, ScriptSegment& s) {
    s.start = j.at("start").get<TimeMs>();
    s.end = j.at("end").get<TimeMs>();
    const auto& t = j.at("target");
    s.target = t.is_null() ? std::nullopt : std::optional<std::size_t>(t.get<std::size_t>());
}

inline void to_json(json& j, const Scenario& s) {
    j = {{"members", s.members},
         {"duration_ms", s.duration_ms},
         {"tick_ms", s.tick_ms},
         {"noise_sigma", s.noise_sigma},
         {"net", {{"latency_ms", s.net.latency_ms}, {"jitter_ms", s.net.jitter_ms}, {"loss", s.net.loss}}},
         {"seed", s.seed},
         {"dwell_ms", s.dwell_ms},
         {"filter", {{"mincutoff", s.filter.mincutoff}, {"beta", s.filter.beta}, {"dcutoff", s.filter.dcutoff}}},
         {"mode", layout::to_string(s.mode)},
         {"render", s.render},
         {"observe", s.observe ? json(*s.observe) : json(nullptr)},
         {"drain_ticks", s.drain_ticks},
         {"scripts", s.scripts}};
}

/// Width of a tile in the default grid for `members` on the configured screen.
inline double default_tile_width(std::size_t members, const layout::RenderConfig& rc) {
    std::vector<ClientId> ids;
    for (std::size_t i = 0; i < members; ++i) ids.emplace_back("c" + std::to_string(i + 1));
    return layout::compute_tile_layout(ids, ids.front(), rc.screen_w, rc.screen_h, rc.grid).tiles.front().rect.w;
}

/// Reads a scenario file. Either "scripts" or "script_gen"
/// ({"min_ms", "max_ms", "none_prob", "seed"}) must be present. The noise may
/// be given in pixels ("noise_sigma") or as a fraction of the default tile
/// width ("noise_sigma_tile_frac").
inline Scenario scenario_from_json(const json& j) {
    Scenario s;
    s.members = j.value("members", s.members);
    s.duration_ms = j.value("duration_ms", s.duration_ms);
    s.tick_ms = j.value("tick_ms", s.tick_ms);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    if (auto n = j.find("net"); n != j.end()) {
        s.net.latency_ms = n->value("latency_ms", s.net.latency_ms);
        s.net.jitter_ms = n->value("jitter_ms", s.net.jitter_ms);
        s.net.loss = n->value("loss", s.net.loss);
    }
    s.seed = j.value("seed", s.seed);
    s.dwell_ms = j.value("dwell_ms", s.dwell_ms);
    if (auto f = j.find("filter"); f != j.end()) {
        s.filter.mincutoff = f->value("mincutoff", s.filter.mincutoff);
        s.filter.beta = f->value("beta", s.filter.beta);
        s.filter.dcutoff = f->value("dcutoff", s.filter.dcutoff);
    }
    if (auto m = j.find("mode"); m != j.end()) s.mode = layout::parse_layout_mode(m->get<std::string>());
    if (auto r = j.find("render"); r != j.end()) s.render = r->get<layout::RenderConfig>();
    if (auto o = j.find("observe"); o != j.end() && !o->is_null()) s.observe = o->get<std::size_t>();
    s.drain_ticks = j.value("drain_ticks", s.drain_ticks);
    if (auto f = j.find("noise_sigma_tile_frac"); f != j.end())
        s.noise_sigma = f->get<double>() * default_tile_width(s.members, s.render);

    if (auto sc = j.find("scripts"); sc != j.end()) {
        s.scripts = sc->get<std::vector<Script>>();
    } else if (auto g = j.find("script_gen"); g != j.end()) {
        s.scripts = random_scripts(s.members, s.duration_ms, s.tick_ms, g->value("min_ms", TimeMs{2000}),
                                   g->value("max_ms", TimeMs{6000}), g->value("none_prob", 0.15),
                                   g->value("seed", s.seed));
    } else {
        throw ConfigError("scenario needs scripts or script_gen");
    }
    return s;
}

} // namespace eyeline::sim

#endif // EYELINE_SIM_SCENARIO_HPP
