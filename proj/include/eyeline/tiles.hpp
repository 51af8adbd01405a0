#ifndef EYELINE_TILES_HPP
#define EYELINE_TILES_HPP

#include <optional>
#include <vector>

#include "eyeline/core.hpp"

namespace eyeline {

/// A participant's video tile as placed on one viewer's screen.
struct TileRect {
    ClientId owner;
    Rect rect;

    friend bool operator==(const TileRect&, const TileRect&) = default;
};

/// Geometry of every participant tile on one viewer's screen.
struct TileLayout {
    ClientId viewer;
    std::vector<TileRect> tiles;
    double spacing = 0.0;
    double screen_w = 0.0;
    double screen_h = 0.0;

    const TileRect* find(const ClientId& owner) const noexcept {
        for (const auto& t : tiles)
            if (t.owner == owner) return &t;
        return nullptr;
    }

    friend bool operator==(const TileLayout&, const TileLayout&) = default;
};

/// The concentric half-width, half-height rectangle used for gaze targeting.
inline Rect central_rect(const Rect& r) noexcept {
    return {r.x + r.w / 4.0, r.y + r.h / 4.0, r.w / 2.0, r.h / 2.0};
}

} // namespace eyeline

#endif // EYELINE_TILES_HPP
