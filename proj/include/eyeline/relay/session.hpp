#ifndef EYELINE_RELAY_SESSION_HPP
#define EYELINE_RELAY_SESSION_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eyeline/core.hpp"
#include "eyeline/layout/scene.hpp"
#include "eyeline/relay/protocol.hpp"

namespace eyeline::relay {

using ConnId = std::uint64_t;

/// Session clock at a given tick, in ms.
inline TimeMs tick_clock(std::uint64_t tick, TimeMs tick_ms) noexcept {
    return static_cast<TimeMs>(tick) * tick_ms;
}

/// One frame to put on the wire. `close` asks the transport to drop the
/// connection after sending.
struct Outbound {
    ConnId to = 0;
    std::string text;
    bool close = false;
};

using Outbox = std::vector<Outbound>;

/// Receives every event the session accepts, stamped with ms since epoch.
class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void record(TimeMs wall_t, const json& event) = 0;
};

struct SessionConfig {
    TimeMs tick_ms = 16;
    std::size_t capacity = 12;
    int miss_threshold = 3; // consecutive undeliverable ticks before eviction
    layout::LayoutMode mode = layout::LayoutMode::directional;
    layout::RenderConfig render;
};

struct SessionStats {
    std::uint64_t anomalies = 0;
    std::uint64_t stale_dropped = 0;
    std::uint64_t gaze_accepted = 0;
    std::uint64_t audio_accepted = 0;
    std::uint64_t signals_relayed = 0;
    std::uint64_t evictions = 0;
};

/// Authoritative state of one conference. All mutation goes through this
/// object; the owner must serialize calls (one event loop per session).
class RelaySession {
public:
    RelaySession(std::string id, SessionConfig cfg, TimeMs epoch, EventSink* sink = nullptr)
        : id_(std::move(id)), cfg_(std::move(cfg)), epoch_(epoch), sink_(sink), scene_(cfg_.render) {
        if (cfg_.tick_ms <= 0) throw ConfigError("tick interval must be positive");
        if (cfg_.capacity < 1) throw ConfigError("capacity must be at least one");
    }

    Outbox join(ConnId conn, Role requested, TimeMs now) {
        Outbox out;
        if (conns_.contains(conn)) {
            send(out, conn, make_error(errc::already_joined, "connection already joined"));
            return out;
        }
        Role role = requested;
        bool downgraded = false;
        if (role == Role::host && host_) {
            role = Role::participant;
            downgraded = true;
        }
        if (role == Role::participant && members_.size() >= cfg_.capacity) {
            out.push_back({conn, make_error(errc::capacity, "session is full").dump(), true});
            return out;
        }

        ClientId id("c" + std::to_string(++next_id_));
        conns_[conn] = Peer{id, role, 0, std::nullopt, std::nullopt};
        by_id_.emplace(id, conn);
        if (role == Role::host) host_ = id;
        else members_.push_back(id);

        send(out, conn, make_welcome(id, members_, cfg_.tick_ms));
        if (downgraded)
            send(out, conn, make_error(errc::role_downgraded, "session already has a host; joined as participant"));
        const auto note = make_peer_joined(id, role).dump();
        for (const auto& [c, p] : conns_)
            if (c != conn) out.push_back({c, note});

        emit(now, {{"kind", kind::join}, {"id", id.str()}, {"role", to_string(role)}});
        return out;
    }

    Outbox leave(ConnId conn, TimeMs now) {
        Outbox out;
        auto it = conns_.find(conn);
        if (it == conns_.end()) return out;
        remove_peer(it, now, out);
        return out;
    }

    /// Dispatches a non-join message from a joined connection.
    Outbox handle(ConnId conn, const json& msg, TimeMs now) {
        Outbox out;
        auto it = conns_.find(conn);
        if (it == conns_.end()) {
            send(out, conn, make_error(errc::not_joined, "join a session first"));
            return out;
        }
        const Peer& peer = it->second;
        const std::string k = msg.value("kind", "");
        try {
            if (k == kind::signal) relay_signal(conn, peer, msg, out);
            else if (k == kind::gaze) ingest_gaze(peer, msg, now);
            else if (k == kind::audio) ingest_audio(peer, msg, now);
            else if (k == kind::observe) handle_observe(conn, peer, msg, now, out);
            else send(out, conn, make_error(errc::bad_message, "unexpected kind '" + k + "'"));
        } catch (const json::exception& e) {
            ++stats_.anomalies;
            send(out, conn, make_error(errc::bad_message, e.what()));
        }
        return out;
    }

    /// One relay tick: coalesced state to every connection, plus the layout
    /// snapshot for an observing host.
    Outbox tick(TimeMs now) {
        Outbox out;
        ++tick_;
        // The render clock is the tick counter, not wall time, so anyone
        // holding the broadcasts can reproduce the frames exactly.
        scene_.advance(members_, edges_, audio_, tick_clock(tick_, cfg_.tick_ms));

        std::optional<layout::RenderFrame> observed_frame;
        if (cfg_.mode == layout::LayoutMode::perspective) {
            // pose interpolation is stateful, so every viewpoint advances each tick
            for (const auto& m : members_) {
                auto f = renderer(m).render(scene_);
                if (observed_ && *observed_ == m) observed_frame = std::move(f);
            }
        } else if (observed_) {
            observed_frame = renderer(*observed_).render(scene_);
        }
        std::erase_if(renderers_, [&](const auto& kv) { return !scene_.is_member(kv.first); });

        const json state = make_state(tick_, members_, edges_, audio_);
        emit(now, state);
        const std::string text = state.dump();
        for (const auto& [c, p] : conns_) out.push_back({c, text});

        if (observed_frame && host_) {
            out.push_back({by_id_.at(*host_), make_snapshot(*observed_, tick_, *observed_frame).dump()});
        }
        return out;
    }

    /// Transport feedback for the last broadcast. Evicts after
    /// `miss_threshold` consecutive failures.
    Outbox report_delivery(ConnId conn, bool ok, TimeMs now) {
        Outbox out;
        auto it = conns_.find(conn);
        if (it == conns_.end()) return out;
        if (ok) {
            it->second.misses = 0;
            return out;
        }
        if (++it->second.misses >= cfg_.miss_threshold) {
            ++stats_.evictions;
            remove_peer(it, now, out);
        }
        return out;
    }

    const std::string& id() const noexcept { return id_; }
    const SessionConfig& config() const noexcept { return cfg_; }
    const std::vector<ClientId>& members() const noexcept { return members_; }
    const layout::EdgeMap& edges() const noexcept { return edges_; }
    const layout::AudioMap& audio() const noexcept { return audio_; }
    const OptClient& host() const noexcept { return host_; }
    const OptClient& observed() const noexcept { return observed_; }
    std::uint64_t tick_count() const noexcept { return tick_; }
    TimeMs epoch() const noexcept { return epoch_; }
    const SessionStats& stats() const noexcept { return stats_; }
    bool empty() const noexcept { return conns_.empty(); }

    OptClient client_of(ConnId c) const {
        auto it = conns_.find(c);
        if (it == conns_.end()) return std::nullopt;
        return it->second.id;
    }

    std::optional<ConnId> conn_of(const ClientId& id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) return std::nullopt;
        return it->second;
    }

private:
    struct Peer {
        ClientId id;
        Role role = Role::participant;
        int misses = 0;
        std::optional<std::uint64_t> last_gaze_seq;
        std::optional<std::uint64_t> last_audio_seq;
    };

    static void send(Outbox& out, ConnId to, const json& j) { out.push_back({to, j.dump()}); }

    void emit(TimeMs now, const json& event) {
        if (sink_) sink_->record(now - epoch_, event);
    }

    bool is_member(const ClientId& id) const {
        return std::find(members_.begin(), members_.end(), id) != members_.end();
    }

    layout::ViewerRenderer& renderer(const ClientId& viewer) {
        auto it = renderers_.find(viewer);
        if (it == renderers_.end())
            it = renderers_.emplace(viewer, layout::ViewerRenderer(viewer, cfg_.mode)).first;
        return it->second;
    }

    void remove_peer(std::map<ConnId, Peer>::iterator it, TimeMs now, Outbox& out) {
        const ClientId id = it->second.id;
        conns_.erase(it);
        by_id_.erase(id);
        std::erase(members_, id);
        edges_.erase(id);
        audio_.erase(id);
        renderers_.erase(id);
        if (host_ && *host_ == id) {
            host_.reset();
            observed_.reset();
        }
        if (observed_ && *observed_ == id) observed_.reset();
        const auto note = make_peer_left(id).dump();
        for (const auto& [c, p] : conns_) out.push_back({c, note});
        emit(now, make_peer_left(id));
    }

    /// Rejects messages whose sequence number does not advance past the last
    /// one of the same kind from this sender. Gaze and audio are separate
    /// streams so that reordering between them never drops either. Messages
    /// without a sequence number are accepted.
    bool fresh(const json& msg, std::optional<std::uint64_t>& last) {
        auto s = msg.find("seq");
        if (s == msg.end()) return true;
        const auto seq = s->get<std::uint64_t>();
        if (last && seq <= *last) {
            ++stats_.stale_dropped;
            return false;
        }
        last = seq;
        return true;
    }

    void relay_signal(ConnId conn, const Peer& peer, const json& msg, Outbox& out) {
        const ClientId to(msg.at("to").get<std::string>());
        auto dst = by_id_.find(to);
        if (dst == by_id_.end()) {
            send(out, conn, make_error(errc::unknown_recipient, "no member " + to.str()));
            return;
        }
        // The payload is carried as an opaque string and never inspected.
        ++stats_.signals_relayed;
        send(out, dst->second, make_signal(peer.id, to, msg.at("payload").get<std::string>()));
    }

    void ingest_gaze(const Peer& peer, const json& msg, TimeMs now) {
        const ClientId source(msg.at("source").get<std::string>());
        if (source != peer.id || !is_member(source)) {
            ++stats_.anomalies;
            return;
        }
        OptClient target = read_opt_id(msg, "target");
        const TimeMs t = msg.value("t", TimeMs{0});
        if (!fresh(msg, conns_.at(by_id_.at(source)).last_gaze_seq)) return;
        if (target && (*target == source || !is_member(*target))) {
            if (*target != source) ++stats_.anomalies;
            target.reset();
        }
        // last writer wins; looking at no one leaves no edge
        if (target) edges_[source] = *target;
        else edges_.erase(source);
        ++stats_.gaze_accepted;
        emit(now, make_gaze(msg.value("seq", std::uint64_t{0}), source, target, t));
    }

    void ingest_audio(const Peer& peer, const json& msg, TimeMs now) {
        const ClientId source(msg.at("source").get<std::string>());
        if (source != peer.id || !is_member(source)) {
            ++stats_.anomalies;
            return;
        }
        const double level = std::clamp(msg.at("level").get<double>(), 0.0, 1.0);
        if (!fresh(msg, conns_.at(by_id_.at(source)).last_audio_seq)) return;
        audio_[source] = level;
        ++stats_.audio_accepted;
        emit(now, make_audio(msg.value("seq", std::uint64_t{0}), source, level));
    }

    void handle_observe(ConnId conn, const Peer& peer, const json& msg, TimeMs now, Outbox& out) {
        if (peer.role != Role::host) {
            send(out, conn, make_error(errc::permission, "only the host may observe"));
            return;
        }
        const OptClient target = read_opt_id(msg, "target");
        if (target && !is_member(*target)) {
            send(out, conn, make_error(errc::unknown_target, "no member " + target->str()));
            return;
        }
        observed_ = target;
        emit(now, make_observe(target));
    }

    std::string id_;
    SessionConfig cfg_;
    TimeMs epoch_;
    EventSink* sink_;

    std::map<ConnId, Peer> conns_;
    std::map<ClientId, ConnId> by_id_;
    std::vector<ClientId> members_; // participants in join order
    OptClient host_;
    OptClient observed_;
    layout::EdgeMap edges_;
    layout::AudioMap audio_;
    std::uint64_t tick_ = 0;
    std::uint64_t next_id_ = 0;
    SessionStats stats_;

    layout::Scene scene_;
    std::map<ClientId, layout::ViewerRenderer> renderers_;
};

} // namespace eyeline::relay

#endif // EYELINE_RELAY_SESSION_HPP
