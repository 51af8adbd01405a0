#ifndef EYELINE_RELAY_SERVER_HPP
#define EYELINE_RELAY_SERVER_HPP

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "eyeline/relay/session.hpp"

namespace eyeline::relay {

/// Routes connections to sessions by the session id in their join message.
/// Transport-agnostic: text in, Outbox out. Not thread-safe; the transport
/// drives it from a single event loop.
class RelayServer {
public:
    /// Called when a session is created; may return a sink for its events.
    using SinkFactory = std::function<EventSink*(const std::string& session)>;

    explicit RelayServer(SessionConfig cfg, SinkFactory sinks = {})
        : cfg_(std::move(cfg)), sinks_(std::move(sinks)) {}

    Outbox on_text(ConnId conn, std::string_view text, TimeMs now) {
        json msg;
        try {
            msg = json::parse(text);
        } catch (const json::parse_error& e) {
            return {{conn, make_error(errc::bad_message, e.what()).dump()}};
        }
        if (!msg.is_object()) return {{conn, make_error(errc::bad_message, "expected a JSON object").dump()}};

        if (msg.value("kind", "") == kind::join) {
            if (route_.contains(conn))
                return {{conn, make_error(errc::already_joined, "connection already joined").dump()}};
            const std::string sid = msg.value("session", "");
            if (sid.empty()) return {{conn, make_error(errc::bad_message, "join needs a session id").dump()}};
            const Role role = msg.value("role", "participant") == "host" ? Role::host : Role::participant;
            auto& session = get_or_create(sid, now);
            auto out = session.join(conn, role, now);
            if (session.client_of(conn)) route_[conn] = sid;
            return out;
        }

        auto it = route_.find(conn);
        if (it == route_.end()) return {{conn, make_error(errc::not_joined, "join a session first").dump()}};
        return sessions_.at(it->second)->handle(conn, msg, now);
    }

    Outbox on_close(ConnId conn, TimeMs now) {
        auto it = route_.find(conn);
        if (it == route_.end()) return {};
        const std::string sid = it->second;
        route_.erase(it);
        auto out = sessions_.at(sid)->leave(conn, now);
        drop_if_empty(sid);
        return out;
    }

    Outbox on_delivery(ConnId conn, bool ok, TimeMs now) {
        auto it = route_.find(conn);
        if (it == route_.end()) return {};
        const std::string sid = it->second;
        auto& session = *sessions_.at(sid);
        auto out = session.report_delivery(conn, ok, now);
        if (!session.client_of(conn)) {
            route_.erase(conn);
            out.push_back({conn, {}, true});
            drop_if_empty(sid);
        }
        return out;
    }

    Outbox tick(TimeMs now) {
        Outbox out;
        for (auto& [sid, s] : sessions_) {
            auto o = s->tick(now);
            out.insert(out.end(), std::make_move_iterator(o.begin()), std::make_move_iterator(o.end()));
        }
        return out;
    }

    RelaySession* session(const std::string& sid) {
        auto it = sessions_.find(sid);
        return it == sessions_.end() ? nullptr : it->second.get();
    }

    std::size_t session_count() const noexcept { return sessions_.size(); }
    const SessionConfig& config() const noexcept { return cfg_; }

private:
    RelaySession& get_or_create(const std::string& sid, TimeMs now) {
        auto it = sessions_.find(sid);
        if (it == sessions_.end()) {
            EventSink* sink = sinks_ ? sinks_(sid) : nullptr;
            it = sessions_.emplace(sid, std::make_unique<RelaySession>(sid, cfg_, now, sink)).first;
        }
        return *it->second;
    }

    void drop_if_empty(const std::string& sid) {
        auto it = sessions_.find(sid);
        if (it != sessions_.end() && it->second->empty()) sessions_.erase(it);
    }

    SessionConfig cfg_;
    SinkFactory sinks_;
    std::map<std::string, std::unique_ptr<RelaySession>> sessions_;
    std::map<ConnId, std::string> route_;
};

} // namespace eyeline::relay

#endif // EYELINE_RELAY_SERVER_HPP
