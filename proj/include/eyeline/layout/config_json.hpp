#ifndef EYELINE_LAYOUT_CONFIG_JSON_HPP
#define EYELINE_LAYOUT_CONFIG_JSON_HPP

#include <json.hpp>

#include "eyeline/layout/scene.hpp"

namespace eyeline::layout {

// Missing keys keep their defaults, so partial configs are accepted.

inline void to_json(nlohmann::json& j, const RenderConfig& c) {
    j = {{"screen_w", c.screen_w},
         {"screen_h", c.screen_h},
         {"grid",
          {{"spacing_frac", c.grid.spacing_frac},
           {"min_spacing", c.grid.min_spacing},
           {"aspect", c.grid.aspect},
           {"min_tile_w", c.grid.min_tile_w},
           {"include_viewer", c.grid.include_viewer}}},
         {"envelope", {{"fade_in_ms", c.envelope.fade_in_ms}, {"fade_out_ms", c.envelope.fade_out_ms}}},
         {"perspective",
          {{"max_yaw", c.perspective.max_yaw},
           {"max_shake", c.perspective.max_shake},
           {"shake_hz", c.perspective.shake_hz},
           {"pose_tau_ms", c.perspective.pose_tau_ms}}},
         {"mic", {{"on", c.mic.on}, {"off", c.mic.off}}}};
}

inline void from_json(const nlohmann::json& j, RenderConfig& c) {
    c.screen_w = j.value("screen_w", c.screen_w);
    c.screen_h = j.value("screen_h", c.screen_h);
    if (auto g = j.find("grid"); g != j.end()) {
        c.grid.spacing_frac = g->value("spacing_frac", c.grid.spacing_frac);
        c.grid.min_spacing = g->value("min_spacing", c.grid.min_spacing);
        c.grid.aspect = g->value("aspect", c.grid.aspect);
        c.grid.min_tile_w = g->value("min_tile_w", c.grid.min_tile_w);
        c.grid.include_viewer = g->value("include_viewer", c.grid.include_viewer);
    }
    if (auto e = j.find("envelope"); e != j.end()) {
        c.envelope.fade_in_ms = e->value("fade_in_ms", c.envelope.fade_in_ms);
        c.envelope.fade_out_ms = e->value("fade_out_ms", c.envelope.fade_out_ms);
    }
    if (auto p = j.find("perspective"); p != j.end()) {
        c.perspective.max_yaw = p->value("max_yaw", c.perspective.max_yaw);
        c.perspective.max_shake = p->value("max_shake", c.perspective.max_shake);
        c.perspective.shake_hz = p->value("shake_hz", c.perspective.shake_hz);
        c.perspective.pose_tau_ms = p->value("pose_tau_ms", c.perspective.pose_tau_ms);
    }
    if (auto m = j.find("mic"); m != j.end()) {
        c.mic.on = m->value("on", c.mic.on);
        c.mic.off = m->value("off", c.mic.off);
    }
}

} // namespace eyeline::layout

#endif // EYELINE_LAYOUT_CONFIG_JSON_HPP
