#ifndef EYELINE_RELAY_PROTOCOL_HPP
#define EYELINE_RELAY_PROTOCOL_HPP

// JSON message builders and field accessors for the relay wire protocol.
// One UTF-8 JSON object per WebSocket text frame.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eyeline/core.hpp"
#include "eyeline/layout/frame_json.hpp"
#include "eyeline/layout/scene.hpp"

namespace eyeline::relay {

using json = nlohmann::json;

enum class Role { participant, host };

inline std::string_view to_string(Role r) noexcept {
    return r == Role::host ? "host" : "participant";
}

namespace kind {
inline constexpr std::string_view join = "join";
inline constexpr std::string_view welcome = "welcome";
inline constexpr std::string_view peer_joined = "peer-joined";
inline constexpr std::string_view peer_left = "peer-left";
inline constexpr std::string_view signal = "signal";
inline constexpr std::string_view gaze = "gaze";
inline constexpr std::string_view audio = "audio";
inline constexpr std::string_view state = "state";
inline constexpr std::string_view observe = "observe";
inline constexpr std::string_view snapshot = "snapshot";
inline constexpr std::string_view error = "error";
} // namespace kind

namespace errc {
inline constexpr std::string_view bad_message = "bad-message";
inline constexpr std::string_view capacity = "capacity-exceeded";
inline constexpr std::string_view role_downgraded = "role-downgraded";
inline constexpr std::string_view not_joined = "not-joined";
inline constexpr std::string_view already_joined = "already-joined";
inline constexpr std::string_view unknown_recipient = "unknown-recipient";
inline constexpr std::string_view unknown_target = "unknown-target";
inline constexpr std::string_view permission = "permission-denied";
} // namespace errc

inline json opt_id(const OptClient& c) { return c ? json(c->str()) : json(nullptr); }

inline OptClient read_opt_id(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return ClientId(it->get<std::string>());
}

inline json ids_json(std::span<const ClientId> ids) {
    json arr = json::array();
    for (const auto& id : ids) arr.push_back(id.str());
    return arr;
}

inline json make_join(std::string_view session, Role role) {
    return {{"kind", kind::join}, {"session", session}, {"role", to_string(role)}};
}

inline json make_welcome(const ClientId& id, std::span<const ClientId> members, TimeMs tick_ms) {
    return {{"kind", kind::welcome}, {"id", id.str()}, {"members", ids_json(members)}, {"tick_ms", tick_ms}};
}

inline json make_peer_joined(const ClientId& id, Role role) {
    return {{"kind", kind::peer_joined}, {"id", id.str()}, {"role", to_string(role)}};
}

inline json make_peer_left(const ClientId& id) { return {{"kind", kind::peer_left}, {"id", id.str()}}; }

inline json make_signal(const ClientId& from, const ClientId& to, const std::string& payload) {
    return {{"kind", kind::signal}, {"from", from.str()}, {"to", to.str()}, {"payload", payload}};
}

inline json make_gaze(std::uint64_t seq, const ClientId& source, const OptClient& target, TimeMs t) {
    return {{"kind", kind::gaze}, {"seq", seq}, {"source", source.str()}, {"target", opt_id(target)}, {"t", t}};
}

inline json make_audio(std::uint64_t seq, const ClientId& source, double level) {
    return {{"kind", kind::audio}, {"seq", seq}, {"source", source.str()}, {"level", level}};
}

inline json make_observe(const OptClient& target) { return {{"kind", kind::observe}, {"target", opt_id(target)}}; }

inline json make_error(std::string_view code, std::string_view message) {
    return {{"kind", kind::error}, {"code", code}, {"message", message}};
}

/// Full relayed state for one tick, members in join order.
inline json make_state(std::uint64_t tick, std::span<const ClientId> members, const layout::EdgeMap& edges,
                       const layout::AudioMap& audio) {
    json e = json::array();
    json a = json::array();
    for (const auto& m : members) {
        auto it = edges.find(m);
        e.push_back({{"source", m.str()}, {"target", it != edges.end() ? opt_id(it->second) : json(nullptr)}});
        auto lv = audio.find(m);
        a.push_back({{"id", m.str()}, {"level", lv != audio.end() ? lv->second : 0.0}});
    }
    return {{"kind", kind::state}, {"tick", tick}, {"edges", std::move(e)}, {"audio", std::move(a)}};
}

inline json make_snapshot(const ClientId& viewer, std::uint64_t tick, const layout::RenderFrame& frame) {
    return {{"kind", kind::snapshot}, {"viewer", viewer.str()}, {"tick", tick}, {"frame", frame}};
}

/// Decoded state broadcast.
struct StateView {
    std::uint64_t tick = 0;
    std::vector<ClientId> members;
    layout::EdgeMap edges;
    layout::AudioMap audio;

    friend bool operator==(const StateView&, const StateView&) = default;
};

inline StateView parse_state(const json& j) {
    StateView s;
    s.tick = j.at("tick").get<std::uint64_t>();
    for (const auto& e : j.at("edges")) {
        ClientId src(e.at("source").get<std::string>());
        s.members.push_back(src);
        s.edges[src] = read_opt_id(e, "target");
    }
    for (const auto& a : j.at("audio")) s.audio[ClientId(a.at("id").get<std::string>())] = a.at("level").get<double>();
    return s;
}

} // namespace eyeline::relay

#endif // EYELINE_RELAY_PROTOCOL_HPP
