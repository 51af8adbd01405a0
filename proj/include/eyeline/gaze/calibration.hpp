#ifndef EYELINE_GAZE_CALIBRATION_HPP
#define EYELINE_GAZE_CALIBRATION_HPP

#include <cmath>
#include <cstddef>
#include <span>

#include "eyeline/core.hpp"
#include "eyeline/gaze/one_euro.hpp"

namespace eyeline::gaze {

inline constexpr double kCalibrationPassPercent = 80.0;

struct CalibrationReport {
    double accuracy = 0.0; // percent
    std::size_t samples_used = 0;
    bool passed = false;
};

/// 60 px on a 1920 px wide screen, scaled with the screen width.
inline double default_calibration_radius(double screen_w) noexcept {
    return 60.0 * screen_w / 1920.0;
}

/// Percentage of predictions landing within `radius` of `target`.
inline CalibrationReport score_calibration(std::span<const GazeSample> predictions, Point target,
                                           double radius) {
    if (predictions.empty()) throw InsufficientData("calibration needs at least one prediction");
    if (!(radius > 0.0)) throw ConfigError("calibration radius must be positive");

    std::size_t inside = 0;
    for (const auto& p : predictions) {
        if (std::hypot(p.x - target.x, p.y - target.y) <= radius) ++inside;
    }
    CalibrationReport r;
    r.samples_used = predictions.size();
    r.accuracy = 100.0 * static_cast<double>(inside) / static_cast<double>(predictions.size());
    r.passed = r.accuracy >= kCalibrationPassPercent;
    return r;
}

} // namespace eyeline::gaze

#endif // EYELINE_GAZE_CALIBRATION_HPP
