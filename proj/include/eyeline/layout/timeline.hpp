#ifndef EYELINE_LAYOUT_TIMELINE_HPP
#define EYELINE_LAYOUT_TIMELINE_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "eyeline/core.hpp"

namespace eyeline::layout {

/// Latest target per source. Ordered so iteration is deterministic.
using EdgeMap = std::map<ClientId, OptClient>;

struct EnvelopeConfig {
    double fade_in_ms = 300.0;
    double fade_out_ms = 300.0;

    void validate() const {
        if (!(fade_in_ms > 0.0) || !(fade_out_ms > 0.0))
            throw ConfigError("fade durations must be positive");
    }
};

/// Linear fade-in while active; after the edge ends, a linear fade from the
/// opacity it had reached down to zero.
/// `edge_age_ms` is the time the edge has been (or was) active.
inline double opacity_envelope(double edge_age_ms, std::optional<double> since_end_ms,
                               double fade_in_ms, double fade_out_ms) {
    if (!(fade_in_ms > 0.0) || !(fade_out_ms > 0.0))
        throw ConfigError("fade durations must be positive");
    const double active = std::clamp(edge_age_ms / fade_in_ms, 0.0, 1.0);
    if (!since_end_ms) return active;
    return active * std::clamp(1.0 - *since_end_ms / fade_out_ms, 0.0, 1.0);
}

/// One directed edge as seen over time. `start` may be fractional when an
/// edge resumes mid-fade.
struct EdgeTrack {
    ClientId source;
    ClientId target;
    double start = 0.0;
    std::optional<double> end;

    bool active() const noexcept { return !end.has_value(); }

    double opacity(TimeMs now, const EnvelopeConfig& env) const {
        const double t = static_cast<double>(now);
        if (end) return opacity_envelope(*end - start, t - *end, env.fade_in_ms, env.fade_out_ms);
        return opacity_envelope(t - start, std::nullopt, env.fade_in_ms, env.fade_out_ms);
    }

    friend bool operator==(const EdgeTrack&, const EdgeTrack&) = default;
};

/// Active and fading edges, sorted by (source, target).
struct EdgeTimeline {
    std::vector<EdgeTrack> tracks;

    const EdgeTrack* find(const ClientId& s, const ClientId& t) const noexcept {
        for (const auto& tr : tracks)
            if (tr.source == s && tr.target == t) return &tr;
        return nullptr;
    }

    friend bool operator==(const EdgeTimeline&, const EdgeTimeline&) = default;
};

/// Folds the current edge map into the timeline at clock `now`.
/// Self-edges are ignored. An edge that restarts while still fading out
/// resumes from its current opacity.
inline EdgeTimeline update_timeline(EdgeTimeline tl, const EdgeMap& current, TimeMs now,
                                    const EnvelopeConfig& env) {
    env.validate();
    const double t = static_cast<double>(now);

    auto wanted = [&](const EdgeTrack& tr) {
        auto it = current.find(tr.source);
        return it != current.end() && it->second && *it->second == tr.target;
    };

    for (auto& tr : tl.tracks) {
        if (tr.active() && !wanted(tr)) tr.end = t;
    }

    for (const auto& [src, tgt] : current) {
        if (!tgt || *tgt == src) continue;
        auto it = std::find_if(tl.tracks.begin(), tl.tracks.end(), [&](const EdgeTrack& tr) {
            return tr.source == src && tr.target == *tgt;
        });
        if (it == tl.tracks.end()) {
            tl.tracks.push_back({src, *tgt, t, std::nullopt});
        } else if (!it->active()) {
            const double o = it->opacity(now, env);
            it->start = t - o * env.fade_in_ms;
            it->end.reset();
        }
    }

    std::erase_if(tl.tracks, [&](const EdgeTrack& tr) {
        return tr.end && t - *tr.end >= env.fade_out_ms;
    });
    std::sort(tl.tracks.begin(), tl.tracks.end(), [](const EdgeTrack& a, const EdgeTrack& b) {
        return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    return tl;
}

} // namespace eyeline::layout

#endif // EYELINE_LAYOUT_TIMELINE_HPP
