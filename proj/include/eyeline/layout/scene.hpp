#ifndef EYELINE_LAYOUT_SCENE_HPP
#define EYELINE_LAYOUT_SCENE_HPP

#include <map>
#include <span>
#include <vector>

#include "eyeline/gaze/mic.hpp"
#include "eyeline/layout/frame.hpp"
#include "eyeline/layout/grid.hpp"
#include "eyeline/layout/timeline.hpp"

namespace eyeline::layout {

using AudioMap = std::map<ClientId, double>;

struct RenderConfig {
    double screen_w = 1920.0;
    double screen_h = 1080.0;
    GridConfig grid;
    EnvelopeConfig envelope;
    PerspectiveConfig perspective;
    gaze::MicThresholds mic;

    friend bool operator==(const RenderConfig& a, const RenderConfig& b) noexcept {
        return a.screen_w == b.screen_w && a.screen_h == b.screen_h &&
               a.grid.spacing_frac == b.grid.spacing_frac && a.grid.min_spacing == b.grid.min_spacing &&
               a.grid.aspect == b.grid.aspect && a.grid.min_tile_w == b.grid.min_tile_w &&
               a.grid.include_viewer == b.grid.include_viewer &&
               a.envelope.fade_in_ms == b.envelope.fade_in_ms &&
               a.envelope.fade_out_ms == b.envelope.fade_out_ms &&
               a.perspective.max_yaw == b.perspective.max_yaw &&
               a.perspective.max_shake == b.perspective.max_shake &&
               a.perspective.shake_hz == b.perspective.shake_hz &&
               a.perspective.pose_tau_ms == b.perspective.pose_tau_ms && a.mic.on == b.mic.on &&
               a.mic.off == b.mic.off;
    }
};

/// Viewer-independent state derived from the sequence of session ticks:
/// member order, edge timeline and mic icons. Both the live server and
/// offline replay drive one of these so their frames agree bit for bit.
class Scene {
public:
    explicit Scene(RenderConfig cfg = {}) : cfg_(std::move(cfg)) {
        cfg_.envelope.validate();
        cfg_.perspective.validate();
        cfg_.mic.validate();
    }

    void advance(std::span<const ClientId> members, const EdgeMap& edges, const AudioMap& audio,
                 TimeMs clock) {
        members_.assign(members.begin(), members.end());
        clock_ = clock;

        EdgeMap live;
        for (const auto& [src, tgt] : edges) {
            if (!is_member(src)) continue;
            live[src] = (tgt && is_member(*tgt) && *tgt != src) ? tgt : std::nullopt;
        }
        timeline_ = update_timeline(std::move(timeline_), live, clock, cfg_.envelope);

        MicMap mics;
        for (const auto& m : members_) {
            auto lv = audio.find(m);
            const double level = lv != audio.end() ? lv->second : 0.0;
            auto pm = mics_.find(m);
            const auto prev = pm != mics_.end() ? pm->second : gaze::MicState::off;
            mics[m] = gaze::audio_to_mic_state(level, prev, cfg_.mic);
        }
        mics_ = std::move(mics);
    }

    TileLayout layout_for(const ClientId& viewer) const {
        if (members_.size() < 2) {
            TileLayout empty;
            empty.viewer = viewer;
            empty.screen_w = cfg_.screen_w;
            empty.screen_h = cfg_.screen_h;
            return empty;
        }
        return compute_tile_layout(members_, viewer, cfg_.screen_w, cfg_.screen_h, cfg_.grid);
    }

    /// Frame for `viewer` at the current clock. `poses` is the viewer's pose
    /// state and is advanced in perspective mode.
    RenderFrame render(const ClientId& viewer, LayoutMode mode, PoseState& poses,
                       FrameDiagnostics* diag = nullptr) const {
        const auto layout = layout_for(viewer);
        switch (mode) {
        case LayoutMode::baseline:
            return baseline_frame(viewer, layout, clock_, mics_);
        case LayoutMode::directional:
            return directional_frame(viewer, timeline_, layout, clock_, cfg_.envelope, mics_, diag);
        case LayoutMode::perspective: {
            auto r = perspective_frame(viewer, timeline_, layout, clock_, poses, cfg_.perspective,
                                       cfg_.envelope, mics_, diag);
            poses = std::move(r.poses);
            return std::move(r.frame);
        }
        }
        return baseline_frame(viewer, layout, clock_, mics_);
    }

    bool is_member(const ClientId& id) const noexcept {
        for (const auto& m : members_)
            if (m == id) return true;
        return false;
    }

    const std::vector<ClientId>& members() const noexcept { return members_; }
    const EdgeTimeline& timeline() const noexcept { return timeline_; }
    const MicMap& mics() const noexcept { return mics_; }
    const RenderConfig& config() const noexcept { return cfg_; }
    TimeMs clock() const noexcept { return clock_; }

private:
    RenderConfig cfg_;
    std::vector<ClientId> members_;
    EdgeTimeline timeline_;
    MicMap mics_;
    TimeMs clock_ = 0;
};

/// Frames for one viewer over successive ticks; keeps that viewer's poses.
class ViewerRenderer {
public:
    ViewerRenderer(ClientId viewer, LayoutMode mode) : viewer_(std::move(viewer)), mode_(mode) {}

    RenderFrame render(const Scene& scene, FrameDiagnostics* diag = nullptr) {
        return scene.render(viewer_, mode_, poses_, diag);
    }

    const ClientId& viewer() const noexcept { return viewer_; }
    LayoutMode mode() const noexcept { return mode_; }

private:
    ClientId viewer_;
    LayoutMode mode_;
    PoseState poses_;
};

} // namespace eyeline::layout

#endif // EYELINE_LAYOUT_SCENE_HPP
