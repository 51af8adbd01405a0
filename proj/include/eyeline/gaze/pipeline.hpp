#ifndef EYELINE_GAZE_PIPELINE_HPP
#define EYELINE_GAZE_PIPELINE_HPP

#include "eyeline/gaze/classify.hpp"
#include "eyeline/gaze/hysteresis.hpp"
#include "eyeline/gaze/one_euro.hpp"

namespace eyeline::gaze {

struct PipelineConfig {
    FilterParams filter;
    TimeMs dwell_ms = kDefaultDwellMs;
};

/// Per-client chain: smooth, classify against the viewer's layout, debounce.
class GazePipeline {
public:
    GazePipeline(ClientId viewer, PipelineConfig cfg = {})
        : viewer_(std::move(viewer)), cfg_(cfg) {
        cfg_.filter.validate();
    }

    struct Output {
        GazeSample smoothed;
        OptClient raw_target;
        OptClient target;
    };

    Output push(const GazeSample& sample, const TileLayout& layout) {
        auto step = filter_step(filter_, cfg_.filter, sample);
        auto raw = classify_target(step.smoothed, layout, viewer_);
        auto dwell = classify_with_hysteresis(dwell_, raw, sample.t, cfg_.dwell_ms);
        filter_ = step.state;
        dwell_ = dwell;
        return {step.smoothed, std::move(raw), dwell_.reported};
    }

    const ClientId& viewer() const noexcept { return viewer_; }
    const FilterState& filter_state() const noexcept { return filter_; }
    const DwellState& dwell_state() const noexcept { return dwell_; }

private:
    ClientId viewer_;
    PipelineConfig cfg_;
    FilterState filter_;
    DwellState dwell_;
};

} // namespace eyeline::gaze

#endif // EYELINE_GAZE_PIPELINE_HPP
