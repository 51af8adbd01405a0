#ifndef EYELINE_GAZE_CLASSIFY_HPP
#define EYELINE_GAZE_CLASSIFY_HPP

#include <optional>

#include "eyeline/core.hpp"
#include "eyeline/gaze/one_euro.hpp"
#include "eyeline/tiles.hpp"

namespace eyeline::gaze {

/// Returns the owner of the tile whose central area contains `p`, or nothing.
/// Looking at one's own tile counts as looking at no one.
inline OptClient classify_target(Point p, const TileLayout& layout, const ClientId& viewer) {
    for (const auto& tile : layout.tiles) {
        if (central_rect(tile.rect).contains(p)) {
            if (tile.owner == viewer) return std::nullopt;
            return tile.owner;
        }
    }
    return std::nullopt;
}

inline OptClient classify_target(const GazeSample& s, const TileLayout& layout,
                                 const ClientId& viewer) {
    return classify_target(s.point(), layout, viewer);
}

} // namespace eyeline::gaze

#endif // EYELINE_GAZE_CLASSIFY_HPP
