#ifndef EYELINE_SIM_TRACE_HPP
#define EYELINE_SIM_TRACE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "eyeline/core.hpp"
#include "eyeline/gaze/one_euro.hpp"
#include "eyeline/tiles.hpp"

namespace eyeline::sim {

/// A script segment resolved to concrete client ids.
struct TraceSegment {
    TimeMs start = 0;
    TimeMs end = 0;
    OptClient target;
};

/// A point in the gutter between tiles, used as the "looking at no one"
/// fixation: midway between the first two tiles of the top row, or in the
/// left margin when the layout has a single tile per row.
inline Point gutter_point(const TileLayout& layout) {
    if (layout.tiles.empty()) return {layout.screen_w / 2.0, layout.screen_h / 2.0};
    const auto& a = layout.tiles[0].rect;
    if (layout.tiles.size() >= 2) {
        const auto& b = layout.tiles[1].rect;
        if (b.y == a.y) return {(a.right() + b.x) / 2.0, a.center().y};
    }
    return {a.x / 2.0, a.center().y};
}

/// Samples at t = k * tick_ms over the script's extent: the ground-truth
/// tile centre (or the gutter point) plus isotropic Gaussian noise.
inline std::vector<gaze::GazeSample> generate_trace(std::span<const TraceSegment> script, const TileLayout& layout,
                                                    double noise_sigma, TimeMs tick_ms, std::uint64_t seed) {
    if (tick_ms <= 0) throw ConfigError("tick must be positive");
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
    std::vector<Point> anchors;
    anchors.reserve(script.size());
    for (const auto& seg : script) {
        if (!seg.target) {
            anchors.push_back(gutter_point(layout));
            continue;
        }
        const auto* tile = layout.find(*seg.target);
        if (!tile) throw ConfigError("script target " + seg.target->str() + " has no tile");
        anchors.push_back(tile->rect.center());
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<gaze::GazeSample> out;
    if (script.empty()) return out;
    const TimeMs end = script.back().end;
    std::size_t seg = 0;
    for (TimeMs t = script.front().start; t < end; t += tick_ms) {
        while (seg + 1 < script.size() && t >= script[seg].end) ++seg;
        // draw both axes even at sigma 0 so traces stay aligned across sigmas
        const double nx = noise(rng);
        const double ny = noise(rng);
        out.push_back({t, anchors[seg].x + noise_sigma * nx, anchors[seg].y + noise_sigma * ny, layout.screen_w,
                       layout.screen_h});
    }
    return out;
}

/// Lag of the smoothed signal behind a linear ramp, in ms: the displacement
/// shortfall divided by the ramp speed, maximised after the warm-up.
inline double measure_filter_lag(const gaze::FilterParams& params, TimeMs tick_ms, double speed_px_s = 100.0,
                                 TimeMs warmup_ms = 1000, TimeMs duration_ms = 5000) {
    gaze::FilterState st;
    double worst = 0.0;
    for (TimeMs t = 0; t <= duration_ms; t += tick_ms) {
        const double x = speed_px_s * static_cast<double>(t) / 1000.0;
        auto step = gaze::filter_step(st, params, {t, x, 0.0});
        st = step.state;
        if (t >= warmup_ms) worst = std::max(worst, (x - step.smoothed.x) / speed_px_s * 1000.0);
    }
    return worst;
}

} // namespace eyeline::sim

#endif // EYELINE_SIM_TRACE_HPP
