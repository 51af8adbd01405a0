#ifndef EYELINE_GAZE_MIC_HPP
#define EYELINE_GAZE_MIC_HPP

#include "eyeline/core.hpp"

namespace eyeline::gaze {

enum class MicState { off, on };

struct MicThresholds {
    double on = 0.15;
    double off = 0.05;

    void validate() const {
        if (!(off >= 0.0 && off < on && on <= 1.0))
            throw ConfigError("mic thresholds need 0 <= off < on <= 1");
    }
};

/// Microphone icon state with hysteresis between the two thresholds.
inline MicState audio_to_mic_state(double level, MicState prev, const MicThresholds& th) {
    th.validate();
    if (level >= th.on) return MicState::on;
    if (level <= th.off) return MicState::off;
    return prev;
}

} // namespace eyeline::gaze

#endif // EYELINE_GAZE_MIC_HPP
