#ifndef EYELINE_LAYOUT_FOCUS_HPP
#define EYELINE_LAYOUT_FOCUS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "eyeline/core.hpp"
#include "eyeline/tiles.hpp"

namespace eyeline::layout {

enum class SizeClass { small = 0, medium = 1, large = 2 };

struct FocusConfig {
    TimeMs grow_ms = 3000;        // continuous focus per size step up
    TimeMs shrink_idle_ms = 5000; // time spent watching someone else per step down
    double small_scale = 0.6;
    double medium_scale = 0.8;
    double large_scale = 1.0;

    double scale(SizeClass c) const noexcept {
        switch (c) {
        case SizeClass::small: return small_scale;
        case SizeClass::medium: return medium_scale;
        case SizeClass::large: return large_scale;
        }
        return medium_scale;
    }
};

struct FocusEntry {
    TimeMs total_ms = 0; // monotone over the session
    TimeMs run_ms = 0;
    TimeMs idle_ms = 0;
    SizeClass size = SizeClass::medium;

    friend bool operator==(const FocusEntry&, const FocusEntry&) = default;
};

/// Per-tile focus accounting plus the slot each tile currently occupies.
struct FocusLedger {
    std::map<ClientId, FocusEntry> entries;
    std::vector<ClientId> slots; // slot i holds slots[i]

    friend bool operator==(const FocusLedger&, const FocusLedger&) = default;
};

inline FocusLedger make_focus_ledger(std::span<const ClientId> owners) {
    FocusLedger l;
    for (const auto& o : owners) {
        l.entries[o] = {};
        l.slots.push_back(o);
    }
    return l;
}

inline FocusLedger make_focus_ledger(const TileLayout& layout) {
    std::vector<ClientId> owners;
    for (const auto& t : layout.tiles) owners.push_back(t.owner);
    return make_focus_ledger(owners);
}

/// Slot indices of `layout` ordered by distance of the slot centre from the
/// screen centre (ties broken by index). Rank 0 is the most central slot.
inline std::vector<std::size_t> center_ranking(const TileLayout& layout) {
    std::vector<std::size_t> idx(layout.tiles.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const Point mid{layout.screen_w / 2.0, layout.screen_h / 2.0};
    auto dist = [&](std::size_t i) {
        const auto c = layout.tiles[i].rect.center();
        return std::hypot(c.x - mid.x, c.y - mid.y);
    };
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
    return idx;
}

struct FocusUpdate {
    FocusLedger ledger;
    std::vector<ClientId> grown;
    std::vector<ClientId> shrunk;
    std::vector<ClientId> moved;
};

/// Accrues `dt_ms` of focus on `focused`. Every `grow_ms` of continuous focus
/// the tile grows one class, and once large it moves one slot closer to the
/// centre. While the viewer watches someone, every other tile shrinks one
/// class per `shrink_idle_ms`. Looking at no one changes nothing.
inline FocusUpdate update_focus_layout(FocusLedger ledger, const OptClient& focused, TimeMs dt_ms,
                                       const TileLayout& base, const FocusConfig& cfg = {}) {
    if (dt_ms <= 0) throw ConfigError("focus update needs dt > 0");
    FocusUpdate out;
    if (!focused || !ledger.entries.contains(*focused)) {
        out.ledger = std::move(ledger);
        return out;
    }

    const auto ranking = center_ranking(base);
    auto migrate = [&](const ClientId& who) {
        auto pos = std::find(ledger.slots.begin(), ledger.slots.end(), who);
        if (pos == ledger.slots.end()) return;
        const auto slot = static_cast<std::size_t>(pos - ledger.slots.begin());
        auto r = std::find(ranking.begin(), ranking.end(), slot);
        if (r == ranking.end() || r == ranking.begin()) return;
        std::swap(ledger.slots[slot], ledger.slots[*(r - 1)]);
        out.moved.push_back(who);
    };

    for (auto& [id, e] : ledger.entries) {
        if (id == *focused) {
            e.total_ms += dt_ms;
            e.run_ms += dt_ms;
            e.idle_ms = 0;
            while (e.run_ms >= cfg.grow_ms) {
                e.run_ms -= cfg.grow_ms;
                if (e.size != SizeClass::large) {
                    e.size = static_cast<SizeClass>(static_cast<int>(e.size) + 1);
                    out.grown.push_back(id);
                }
                if (e.size == SizeClass::large) migrate(id);
            }
        } else {
            e.run_ms = 0;
            e.idle_ms += dt_ms;
            while (e.idle_ms >= cfg.shrink_idle_ms) {
                e.idle_ms -= cfg.shrink_idle_ms;
                if (e.size != SizeClass::small) {
                    e.size = static_cast<SizeClass>(static_cast<int>(e.size) - 1);
                    out.shrunk.push_back(id);
                }
            }
        }
    }
    out.ledger = std::move(ledger);
    return out;
}

/// Places each tile in its ledger slot, scaled by size class and centred in
/// the slot's cell. Cells come from `base`, so disjointness carries over.
inline TileLayout apply_focus(const TileLayout& base, const FocusLedger& ledger,
                              const FocusConfig& cfg = {}) {
    if (ledger.slots.size() != base.tiles.size())
        throw ConfigError("focus ledger does not match the layout");
    TileLayout out = base;
    for (std::size_t i = 0; i < base.tiles.size(); ++i) {
        const auto& cell = base.tiles[i].rect;
        const auto& owner = ledger.slots[i];
        auto it = ledger.entries.find(owner);
        if (it == ledger.entries.end()) throw ConfigError("focus ledger has no entry for " + owner.str());
        const double k = std::clamp(cfg.scale(it->second.size), 0.0, 1.0);
        const double w = cell.w * k;
        const double h = cell.h * k;
        out.tiles[i] = {owner, {cell.x + (cell.w - w) / 2.0, cell.y + (cell.h - h) / 2.0, w, h}};
    }
    return out;
}

} // namespace eyeline::layout

#endif // EYELINE_LAYOUT_FOCUS_HPP
