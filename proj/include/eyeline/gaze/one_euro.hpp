#ifndef EYELINE_GAZE_ONE_EURO_HPP
#define EYELINE_GAZE_ONE_EURO_HPP

#include <cmath>
#include <numbers>
#include <string>

#include "eyeline/core.hpp"

namespace eyeline::gaze {

/// One timestamped gaze point in the viewer's screen space (pixels).
struct GazeSample {
    TimeMs t = 0;
    double x = 0.0;
    double y = 0.0;
    double screen_w = 1920.0;
    double screen_h = 1080.0;

    Point point() const noexcept { return {x, y}; }

    friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

struct FilterParams {
    double mincutoff = 0.3; // Hz
    double beta = 0.3;
    double dcutoff = 1.0;   // Hz

    void validate() const {
        if (!(mincutoff > 0.0) || !(dcutoff > 0.0) || !(beta >= 0.0))
            throw ConfigError("filter params need mincutoff > 0, dcutoff > 0, beta >= 0");
    }
};

/// Recurrence state of a two-axis adaptive low-pass filter.
/// Numeric fields are meaningless until `initialized` is set.
struct FilterState {
    double x = 0.0;
    double y = 0.0;
    double dx = 0.0; // px/s
    double dy = 0.0;
    TimeMs t = 0;
    bool initialized = false;
};

/// Smoothing factor of a first-order low-pass at cutoff `fc` (Hz) for a
/// sampling period `te` (seconds).
inline double smoothing_factor(double fc, double te) noexcept {
    const double tau = 1.0 / (2.0 * std::numbers::pi * fc);
    return 1.0 / (1.0 + tau / te);
}

namespace detail {

struct AxisStep {
    double value;
    double deriv;
};

inline AxisStep one_euro_axis(double raw, double prev, double prev_deriv,
                              double te, const FilterParams& p) noexcept {
    // The derivative is taken against the previous *smoothed* value.
    const double d = (raw - prev) / te;
    const double ad = smoothing_factor(p.dcutoff, te);
    // Written as prev + a*(raw - prev) so a constant input is an exact fixed point.
    const double deriv = prev_deriv + ad * (d - prev_deriv);
    const double fc = p.mincutoff + p.beta * std::abs(deriv);
    const double a = smoothing_factor(fc, te);
    return {prev + a * (raw - prev), deriv};
}

} // namespace detail

struct FilterStep {
    FilterState state;
    GazeSample smoothed;
};

/// Advances the one-euro filter by one sample. The first sample passes
/// through with a zero derivative. Throws OrderingViolation if `sample.t`
/// does not strictly follow the previous timestamp.
inline FilterStep filter_step(const FilterState& state, const FilterParams& params,
                              const GazeSample& sample) {
    if (!state.initialized) {
        FilterState next{sample.x, sample.y, 0.0, 0.0, sample.t, true};
        return {next, sample};
    }
    if (sample.t <= state.t) {
        throw OrderingViolation("gaze sample at t=" + std::to_string(sample.t) +
                                " does not follow t=" + std::to_string(state.t));
    }

    const double te = static_cast<double>(sample.t - state.t) / 1000.0;
    const auto ax = detail::one_euro_axis(sample.x, state.x, state.dx, te, params);
    const auto ay = detail::one_euro_axis(sample.y, state.y, state.dy, te, params);

    FilterState next{ax.value, ay.value, ax.deriv, ay.deriv, sample.t, true};
    GazeSample out = sample;
    out.x = ax.value;
    out.y = ay.value;
    return {next, out};
}

} // namespace eyeline::gaze

#endif // EYELINE_GAZE_ONE_EURO_HPP
