#ifndef EYELINE_LAYOUT_GRID_HPP
#define EYELINE_LAYOUT_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "eyeline/core.hpp"
#include "eyeline/tiles.hpp"

namespace eyeline::layout {

struct GridConfig {
    double spacing_frac = 0.025; // of screen width; 48 px at 1920
    double min_spacing = 8.0;    // px
    double aspect = 0.75;        // tile height / width
    double min_tile_w = 120.0;   // px
    bool include_viewer = true;
};

struct GridShape {
    std::size_t cols = 0;
    std::size_t rows = 0;
};

inline GridShape grid_shape(std::size_t n) noexcept {
    if (n == 0) return {};
    auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    return {cols, (n + cols - 1) / cols};
}

/// Row-major grid in member order; each row is centred, the grid is centred
/// on the screen. Throws LayoutInfeasible when tiles would fall below the
/// configured minimum size.
inline TileLayout compute_tile_layout(std::span<const ClientId> members, const ClientId& viewer,
                                      double screen_w, double screen_h, const GridConfig& cfg = {}) {
    if (members.size() < 2) throw ConfigError("a tile layout needs at least two members");
    {
        std::unordered_set<ClientId> seen;
        for (const auto& m : members)
            if (!seen.insert(m).second) throw ConfigError("duplicate member " + m.str());
    }
    if (!(screen_w > 0.0) || !(screen_h > 0.0)) throw ConfigError("screen size must be positive");

    std::vector<ClientId> owners;
    owners.reserve(members.size());
    for (const auto& m : members)
        if (cfg.include_viewer || m != viewer) owners.push_back(m);

    TileLayout out;
    out.viewer = viewer;
    out.screen_w = screen_w;
    out.screen_h = screen_h;
    out.spacing = std::max(cfg.min_spacing, cfg.spacing_frac * screen_w);
    if (owners.empty()) return out;

    const auto shape = grid_shape(owners.size());
    const double s = out.spacing;
    const auto cols = static_cast<double>(shape.cols);
    const auto rows = static_cast<double>(shape.rows);

    double tw = (screen_w - (cols + 1.0) * s) / cols;
    double th = tw * cfg.aspect;
    if (rows * th + (rows + 1.0) * s > screen_h) {
        th = (screen_h - (rows + 1.0) * s) / rows;
        tw = th / cfg.aspect;
    }
    if (!(tw >= cfg.min_tile_w) || !(th > 0.0)) {
        throw LayoutInfeasible("screen " + std::to_string(screen_w) + "x" + std::to_string(screen_h) +
                               " cannot fit " + std::to_string(owners.size()) + " tiles");
    }

    const double grid_h = rows * th + (rows - 1.0) * s;
    const double y0 = (screen_h - grid_h) / 2.0;
    out.tiles.reserve(owners.size());
    for (std::size_t r = 0; r < shape.rows; ++r) {
        const std::size_t first = r * shape.cols;
        const std::size_t count = std::min(shape.cols, owners.size() - first);
        const double row_w = static_cast<double>(count) * tw + static_cast<double>(count - 1) * s;
        const double x0 = (screen_w - row_w) / 2.0;
        for (std::size_t c = 0; c < count; ++c) {
            Rect rect{x0 + static_cast<double>(c) * (tw + s),
                      y0 + static_cast<double>(r) * (th + s), tw, th};
            out.tiles.push_back({owners[first + c], rect});
        }
    }
    return out;
}

/// Smallest gap between any two tiles (infinite for fewer than two tiles).
/// Negative when tiles overlap.
inline double min_tile_gap(const TileLayout& layout) noexcept {
    double best = std::numeric_limits<double>::infinity();
    const auto& t = layout.tiles;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = i + 1; j < t.size(); ++j) {
            const auto& a = t[i].rect;
            const auto& b = t[j].rect;
            const double gx = std::max(b.x - a.right(), a.x - b.right());
            const double gy = std::max(b.y - a.bottom(), a.y - b.bottom());
            best = std::min(best, std::max(gx, gy));
        }
    }
    return best;
}

} // namespace eyeline::layout

#endif // EYELINE_LAYOUT_GRID_HPP
