#ifndef EYELINE_LAYOUT_SHARE_HPP
#define EYELINE_LAYOUT_SHARE_HPP

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "eyeline/core.hpp"
#include "eyeline/layout/timeline.hpp"

namespace eyeline::layout {

/// Fraction of the other members currently looking at `target`.
inline double aggregate_gaze_share(std::span<const GazeEdge> edges, const ClientId& target,
                                   std::size_t members) {
    if (members < 2) throw ConfigError("gaze share needs at least two members");
    std::set<ClientId> sources;
    for (const auto& e : edges)
        if (e.target && *e.target == target && e.source != target) sources.insert(e.source);
    return static_cast<double>(sources.size()) / static_cast<double>(members - 1);
}

inline double aggregate_gaze_share(const EdgeMap& edges, const ClientId& target, std::size_t members) {
    std::vector<GazeEdge> list;
    for (const auto& [s, t] : edges) list.push_back({s, t, 0});
    return aggregate_gaze_share(list, target, members);
}

} // namespace eyeline::layout

#endif // EYELINE_LAYOUT_SHARE_HPP
