#ifndef EYELINE_LAYOUT_FRAME_HPP
#define EYELINE_LAYOUT_FRAME_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eyeline/core.hpp"
#include "eyeline/gaze/mic.hpp"
#include "eyeline/layout/timeline.hpp"
#include "eyeline/tiles.hpp"

namespace eyeline::layout {

enum class LayoutMode { baseline, directional, perspective };

inline std::string_view to_string(LayoutMode m) noexcept {
    switch (m) {
    case LayoutMode::baseline: return "baseline";
    case LayoutMode::directional: return "directional";
    case LayoutMode::perspective: return "perspective";
    }
    return "baseline";
}

/// Accepts the long names and the short forms b / dir / perp.
inline LayoutMode parse_layout_mode(std::string_view s) {
    if (s == "baseline" || s == "b") return LayoutMode::baseline;
    if (s == "directional" || s == "dir") return LayoutMode::directional;
    if (s == "perspective" || s == "persp" || s == "perp") return LayoutMode::perspective;
    throw ConfigError("unknown layout mode '" + std::string(s) + "'");
}

struct Arrow {
    ClientId source;
    ClientId target;
    double opacity = 0.0;
    Point from; // on the source tile border
    Point to;   // on the target tile border; arrowhead end

    friend bool operator==(const Arrow&, const Arrow&) = default;
};

struct Glow {
    ClientId tile;
    double intensity = 0.0;

    friend bool operator==(const Glow&, const Glow&) = default;
};

struct Pose {
    ClientId tile;
    double yaw = 0.0;   // degrees, positive turns right
    double shake = 0.0; // px

    friend bool operator==(const Pose&, const Pose&) = default;
};

struct MicIcon {
    ClientId tile;
    bool on = false;

    friend bool operator==(const MicIcon&, const MicIcon&) = default;
};

/// Everything a thin client needs to draw one viewer's screen for one tick.
struct RenderFrame {
    ClientId viewer;
    TimeMs t = 0;
    LayoutMode mode = LayoutMode::baseline;
    std::vector<Arrow> arrows;
    std::vector<Glow> glows;
    std::vector<Pose> poses;
    std::vector<MicIcon> mic_icons;
    TileLayout tile_geometry;

    friend bool operator==(const RenderFrame&, const RenderFrame&) = default;
};

struct PerspectiveConfig {
    double max_yaw = 30.0;      // degrees
    double max_shake = 4.0;     // px
    double shake_hz = 2.0;
    double pose_tau_ms = 150.0; // exponential approach time constant

    void validate() const {
        if (!(max_yaw > 0.0) || !(max_shake >= 0.0) || !(shake_hz > 0.0) || !(pose_tau_ms > 0.0))
            throw ConfigError("invalid perspective config");
    }
};

using MicMap = std::map<ClientId, gaze::MicState>;

/// Count of edges dropped because an endpoint had no tile in the layout.
struct FrameDiagnostics {
    std::size_t skipped_edges = 0;
};

/// Closest pair of points between two disjoint rectangles. Where the closest
/// pairs form a segment, the midpoint of the shared extent is used.
inline std::pair<Point, Point> nearest_border_points(const Rect& a, const Rect& b) noexcept {
    auto axis = [](double a0, double a1, double b0, double b1) -> std::pair<double, double> {
        const double lo = std::max(a0, b0);
        const double hi = std::min(a1, b1);
        if (lo <= hi) return {(lo + hi) / 2.0, (lo + hi) / 2.0};
        if (a1 < b0) return {a1, b0};
        return {a0, b1};
    };
    const auto [ax, bx] = axis(a.x, a.right(), b.x, b.right());
    const auto [ay, by] = axis(a.y, a.bottom(), b.y, b.bottom());
    return {{ax, ay}, {bx, by}};
}

/// Horizontal turn toward a target: sign follows the direction of the
/// target, magnitude grows linearly with |dx| / span and saturates at max_yaw.
inline double yaw_toward(Point source, Point target, double max_yaw, double span) {
    if (!(span > 0.0)) throw ConfigError("yaw span must be positive");
    const double dx = target.x - source.x;
    if (dx == 0.0) return 0.0;
    const double mag = max_yaw * std::min(1.0, std::abs(dx) / span);
    return dx > 0.0 ? mag : -mag;
}

/// Distance between the leftmost and rightmost tile centres; the full
/// horizontal separation that maps to max_yaw. Falls back to screen width.
inline double yaw_span(const TileLayout& layout) noexcept {
    if (layout.tiles.empty()) return layout.screen_w;
    double lo = layout.tiles.front().rect.center().x;
    double hi = lo;
    for (const auto& t : layout.tiles) {
        lo = std::min(lo, t.rect.center().x);
        hi = std::max(hi, t.rect.center().x);
    }
    return hi > lo ? hi - lo : layout.screen_w;
}

namespace detail {

inline RenderFrame frame_base(const ClientId& viewer, TimeMs clock, LayoutMode mode,
                              const TileLayout& layout, const MicMap& mics) {
    RenderFrame f;
    f.viewer = viewer;
    f.t = clock;
    f.mode = mode;
    f.tile_geometry = layout;
    f.mic_icons.reserve(layout.tiles.size());
    for (const auto& tile : layout.tiles) {
        auto it = mics.find(tile.owner);
        f.mic_icons.push_back({tile.owner, it != mics.end() && it->second == gaze::MicState::on});
    }
    return f;
}

} // namespace detail

inline RenderFrame baseline_frame(const ClientId& viewer, const TileLayout& layout, TimeMs clock,
                                  const MicMap& mics = {}) {
    return detail::frame_base(viewer, clock, LayoutMode::baseline, layout, mics);
}

/// Arrows between tiles for gaze among others, glow on tiles whose owner
/// looks at the viewer. Fading edges are included with their envelope.
inline RenderFrame directional_frame(const ClientId& viewer, const EdgeTimeline& timeline,
                                     const TileLayout& layout, TimeMs clock,
                                     const EnvelopeConfig& env, const MicMap& mics = {},
                                     FrameDiagnostics* diag = nullptr) {
    env.validate();
    auto f = detail::frame_base(viewer, clock, LayoutMode::directional, layout, mics);
    for (const auto& tr : timeline.tracks) {
        const double o = tr.opacity(clock, env);
        const TileRect* src = layout.find(tr.source);
        if (tr.target == viewer) {
            if (!src) {
                if (diag) ++diag->skipped_edges;
                continue;
            }
            f.glows.push_back({tr.source, o});
            continue;
        }
        const TileRect* dst = layout.find(tr.target);
        if (!dst || (!src && tr.source != viewer)) {
            if (diag) ++diag->skipped_edges;
            continue;
        }
        if (!src) continue; // viewer without a tile of their own
        const auto [from, to] = nearest_border_points(src->rect, dst->rect);
        f.arrows.push_back({tr.source, tr.target, o, from, to});
    }
    return f;
}

/// Per-tile yaw carried between perspective frames.
struct PoseState {
    std::map<ClientId, double> yaw;
    std::optional<TimeMs> last_clock;

    friend bool operator==(const PoseState&, const PoseState&) = default;
};

/// Moves `current` toward `goal` by the exponential approach for `dt_ms`.
/// Never overshoots.
inline double interpolate_pose(double current, double goal, double dt_ms, double tau_ms) noexcept {
    if (dt_ms <= 0.0) return current;
    const double k = 1.0 - std::exp(-dt_ms / tau_ms);
    return current + (goal - current) * k;
}

struct PerspectiveResult {
    RenderFrame frame;
    PoseState poses;
};

/// Tiles turn toward whoever their owner looks at; a tile whose owner looks
/// at the viewer faces forward and shakes. Turning is interpolated.
inline PerspectiveResult perspective_frame(const ClientId& viewer, const EdgeTimeline& timeline,
                                           const TileLayout& layout, TimeMs clock,
                                           const PoseState& prev, const PerspectiveConfig& cfg,
                                           const EnvelopeConfig& env, const MicMap& mics = {},
                                           FrameDiagnostics* diag = nullptr) {
    cfg.validate();
    env.validate();
    auto f = detail::frame_base(viewer, clock, LayoutMode::perspective, layout, mics);
    const double dt = prev.last_clock ? static_cast<double>(clock - *prev.last_clock) : 0.0;
    const double span = yaw_span(layout);
    const double phase = 2.0 * std::numbers::pi * cfg.shake_hz * static_cast<double>(clock) / 1000.0;

    PoseState next;
    next.last_clock = clock;
    f.poses.reserve(layout.tiles.size());
    for (const auto& tile : layout.tiles) {
        double goal = 0.0;
        double shake = 0.0;
        for (const auto& tr : timeline.tracks) {
            if (!tr.active() || tr.source != tile.owner) continue;
            if (tr.target == viewer) {
                shake = cfg.max_shake * tr.opacity(clock, env) * std::sin(phase);
            } else if (const TileRect* dst = layout.find(tr.target)) {
                goal = yaw_toward(tile.rect.center(), dst->rect.center(), cfg.max_yaw, span);
            } else if (diag) {
                ++diag->skipped_edges;
            }
            break;
        }
        auto it = prev.yaw.find(tile.owner);
        const double current = it != prev.yaw.end() ? it->second : 0.0;
        const double yaw =
            std::clamp(interpolate_pose(current, goal, dt, cfg.pose_tau_ms), -cfg.max_yaw, cfg.max_yaw);
        next.yaw[tile.owner] = yaw;
        f.poses.push_back({tile.owner, yaw, std::clamp(shake, -cfg.max_shake, cfg.max_shake)});
    }
    return {std::move(f), std::move(next)};
}

} // namespace eyeline::layout

#endif // EYELINE_LAYOUT_FRAME_HPP
