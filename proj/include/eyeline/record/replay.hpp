#ifndef EYELINE_RECORD_REPLAY_HPP
#define EYELINE_RECORD_REPLAY_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <vector>

#include "eyeline/layout/scene.hpp"
#include "eyeline/record/event_log.hpp"
#include "eyeline/relay/protocol.hpp"

namespace eyeline::record {

struct ReplayFrame {
    std::uint64_t tick = 0;
    layout::RenderFrame frame;

    friend bool operator==(const ReplayFrame&, const ReplayFrame&) = default;
};

/// Re-derives one viewer's frames from the logged state broadcasts, using
/// the same Scene and tick clock the live relay uses. Frames are produced for every tick at
/// which the viewer is a participant.
class Replayer {
public:
    Replayer(const LogHeader& header, ClientId viewer, layout::LayoutMode mode)
        : cfg_(session_config_from(header.config)), scene_(cfg_.render), renderer_(std::move(viewer), mode) {}

    /// Feeds one record; returns a frame when the record is a tick.
    std::optional<ReplayFrame> feed(const EventRecord& r) {
        if (r.kind != relay::kind::state) return std::nullopt;
        const auto st = relay::parse_state(r.payload);
        scene_.advance(st.members, st.edges, st.audio, relay::tick_clock(st.tick, cfg_.tick_ms));
        if (!scene_.is_member(renderer_.viewer())) return std::nullopt;
        return ReplayFrame{st.tick, renderer_.render(scene_)};
    }

    const relay::SessionConfig& config() const noexcept { return cfg_; }

private:
    relay::SessionConfig cfg_;
    layout::Scene scene_;
    layout::ViewerRenderer renderer_;
};

inline std::vector<ReplayFrame> replay(const EventLog& log, const ClientId& viewer, layout::LayoutMode mode) {
    Replayer rp(log.header(), viewer, mode);
    std::vector<ReplayFrame> out;
    for (const auto& r : log.records()) {
        try {
            if (auto f = rp.feed(r)) out.push_back(std::move(*f));
        } catch (const nlohmann::json::exception& e) {
            throw LogCorrupt(r.seq + 2, 0, std::string("bad state record: ") + e.what());
        }
    }
    return out;
}

/// Streaming variant; stops with LogCorrupt at the first damaged line.
/// Frames produced before the damage are left in `out`.
inline void replay(std::istream& in, const ClientId& viewer, layout::LayoutMode mode,
                   std::vector<ReplayFrame>& out) {
    LogReader reader(in);
    Replayer rp(reader.header(), viewer, mode);
    while (auto r = reader.next()) {
        try {
            if (auto f = rp.feed(*r)) out.push_back(std::move(*f));
        } catch (const nlohmann::json::exception& e) {
            throw LogCorrupt(reader.line(), reader.line_offset(), std::string("bad state record: ") + e.what());
        }
    }
}

} // namespace eyeline::record

#endif // EYELINE_RECORD_REPLAY_HPP
