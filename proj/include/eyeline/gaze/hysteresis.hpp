#ifndef EYELINE_GAZE_HYSTERESIS_HPP
#define EYELINE_GAZE_HYSTERESIS_HPP

#include "eyeline/core.hpp"

namespace eyeline::gaze {

inline constexpr TimeMs kDefaultDwellMs = 100;

/// Debounce state for the per-client gaze target.
struct DwellState {
    OptClient reported;      // what downstream sees
    OptClient candidate;     // latest raw classification
    TimeMs candidate_since = 0;
    TimeMs last_t = 0;
    bool started = false;

    friend bool operator==(const DwellState&, const DwellState&) = default;
};

/// Feeds one raw classification. The reported target switches to the
/// candidate once the candidate has been unchanged for at least `dwell_ms`.
inline DwellState classify_with_hysteresis(DwellState s, const OptClient& candidate, TimeMs t,
                                           TimeMs dwell_ms = kDefaultDwellMs) {
    if (s.started && t < s.last_t)
        throw OrderingViolation("dwell update went back in time");

    if (!s.started || candidate != s.candidate) {
        s.candidate = candidate;
        s.candidate_since = t;
        s.started = true;
    }
    s.last_t = t;

    if (s.candidate != s.reported && t - s.candidate_since >= dwell_ms)
        s.reported = s.candidate;
    return s;
}

} // namespace eyeline::gaze

#endif // EYELINE_GAZE_HYSTERESIS_HPP
