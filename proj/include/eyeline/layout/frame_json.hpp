#ifndef EYELINE_LAYOUT_FRAME_JSON_HPP
#define EYELINE_LAYOUT_FRAME_JSON_HPP

// RenderFrame wire schema shared by layout snapshots and replay output.

#include <json.hpp>

#include "eyeline/layout/frame.hpp"

namespace eyeline {

inline void to_json(nlohmann::json& j, const ClientId& id) { j = id.str(); }
inline void from_json(const nlohmann::json& j, ClientId& id) { id = ClientId(j.get<std::string>()); }

inline void to_json(nlohmann::json& j, const Point& p) { j = nlohmann::json::array({p.x, p.y}); }
inline void from_json(const nlohmann::json& j, Point& p) {
    p.x = j.at(0).get<double>();
    p.y = j.at(1).get<double>();
}

inline void to_json(nlohmann::json& j, const TileRect& t) {
    j = {{"owner", t.owner}, {"x", t.rect.x}, {"y", t.rect.y}, {"w", t.rect.w}, {"h", t.rect.h}};
}
inline void from_json(const nlohmann::json& j, TileRect& t) {
    t.owner = j.at("owner").get<ClientId>();
    t.rect = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(),
              j.at("h").get<double>()};
}

inline void to_json(nlohmann::json& j, const TileLayout& l) {
    j = {{"viewer", l.viewer},
         {"spacing", l.spacing},
         {"screen_w", l.screen_w},
         {"screen_h", l.screen_h},
         {"tiles", l.tiles}};
}
inline void from_json(const nlohmann::json& j, TileLayout& l) {
    l.viewer = j.at("viewer").get<ClientId>();
    l.spacing = j.at("spacing").get<double>();
    l.screen_w = j.at("screen_w").get<double>();
    l.screen_h = j.at("screen_h").get<double>();
    l.tiles = j.at("tiles").get<std::vector<TileRect>>();
}

namespace layout {

inline void to_json(nlohmann::json& j, const Arrow& a) {
    j = {{"source", a.source}, {"target", a.target}, {"opacity", a.opacity}, {"from", a.from}, {"to", a.to}};
}
inline void from_json(const nlohmann::json& j, Arrow& a) {
    a.source = j.at("source").get<ClientId>();
    a.target = j.at("target").get<ClientId>();
    a.opacity = j.at("opacity").get<double>();
    a.from = j.at("from").get<Point>();
    a.to = j.at("to").get<Point>();
}

inline void to_json(nlohmann::json& j, const Glow& g) {
    j = {{"tile", g.tile}, {"intensity", g.intensity}};
}
inline void from_json(const nlohmann::json& j, Glow& g) {
    g.tile = j.at("tile").get<ClientId>();
    g.intensity = j.at("intensity").get<double>();
}

inline void to_json(nlohmann::json& j, const Pose& p) {
    j = {{"tile", p.tile}, {"yaw", p.yaw}, {"shake", p.shake}};
}
inline void from_json(const nlohmann::json& j, Pose& p) {
    p.tile = j.at("tile").get<ClientId>();
    p.yaw = j.at("yaw").get<double>();
    p.shake = j.at("shake").get<double>();
}

inline void to_json(nlohmann::json& j, const MicIcon& m) { j = {{"tile", m.tile}, {"on", m.on}}; }
inline void from_json(const nlohmann::json& j, MicIcon& m) {
    m.tile = j.at("tile").get<ClientId>();
    m.on = j.at("on").get<bool>();
}

inline void to_json(nlohmann::json& j, const RenderFrame& f) {
    j = {{"viewer", f.viewer},
         {"t", f.t},
         {"mode", std::string(to_string(f.mode))},
         {"arrows", f.arrows},
         {"glows", f.glows},
         {"poses", f.poses},
         {"mic_icons", f.mic_icons},
         {"tile_geometry", f.tile_geometry}};
}
inline void from_json(const nlohmann::json& j, RenderFrame& f) {
    f.viewer = j.at("viewer").get<ClientId>();
    f.t = j.at("t").get<TimeMs>();
    f.mode = parse_layout_mode(j.at("mode").get<std::string>());
    f.arrows = j.at("arrows").get<std::vector<Arrow>>();
    f.glows = j.at("glows").get<std::vector<Glow>>();
    f.poses = j.at("poses").get<std::vector<Pose>>();
    f.mic_icons = j.at("mic_icons").get<std::vector<MicIcon>>();
    f.tile_geometry = j.at("tile_geometry").get<TileLayout>();
}

} // namespace layout
} // namespace eyeline

#endif // EYELINE_LAYOUT_FRAME_JSON_HPP
