#ifndef EYELINE_RELAY_WS_TRANSPORT_HPP
#define EYELINE_RELAY_WS_TRANSPORT_HPP

// WebSocket front end for RelayServer (Boost.Beast). Everything runs on one
// io_context thread, which serializes all session mutation.

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "eyeline/relay/server.hpp"

namespace eyeline::relay {

namespace ws_detail {
namespace beast = boost::beast;
namespace websocket = boost::beast::websocket;
namespace asio = boost::asio;
using tcp = boost::asio::ip::tcp;
} // namespace ws_detail

struct WsConfig {
    std::string address = "0.0.0.0";
    std::uint16_t port = 8765;   // 0 picks a free port
    std::size_t max_queue = 64;  // pending frames before a tick counts as undeliverable
};

class WsRelay {
public:
    using Logger = std::function<void(const std::string&)>;

    WsRelay(ws_detail::asio::io_context& ioc, WsConfig ws, SessionConfig cfg, RelayServer::SinkFactory sinks = {},
            Logger log = {})
        : ioc_(ioc), ws_(std::move(ws)), server_(std::move(cfg), std::move(sinks)), acceptor_(ioc),
          timer_(ioc), log_(std::move(log)), start_(std::chrono::steady_clock::now()) {
        using namespace ws_detail;
        tcp::endpoint ep(asio::ip::make_address(ws_.address), ws_.port);
        acceptor_.open(ep.protocol());
        acceptor_.set_option(asio::socket_base::reuse_address(true));
        acceptor_.bind(ep);
        acceptor_.listen(asio::socket_base::max_listen_connections);
    }

    /// Starts accepting and ticking; call ioc.run() afterwards.
    void start() {
        accept();
        schedule_tick(std::chrono::steady_clock::now());
    }

    void stop() {
        boost::system::error_code ec;
        acceptor_.close(ec);
        timer_.cancel();
        for (auto& [id, c] : conns_) c->close_now();
        conns_.clear();
    }

    std::uint16_t port() const { return acceptor_.local_endpoint().port(); }
    RelayServer& server() noexcept { return server_; }

private:
    struct Conn : std::enable_shared_from_this<Conn> {
        Conn(ws_detail::tcp::socket s, ConnId id, WsRelay& owner) : ws(std::move(s)), id(id), owner(owner) {}

        ws_detail::websocket::stream<ws_detail::beast::tcp_stream> ws;
        ConnId id;
        WsRelay& owner;
        ws_detail::beast::flat_buffer buf;
        std::deque<std::string> queue;
        bool writing = false;
        bool closing = false; // close once the queue drains
        bool dead = false;

        void run() {
            ws.set_option(ws_detail::websocket::stream_base::timeout::suggested(ws_detail::beast::role_type::server));
            ws.text(true);
            ws.async_accept([self = shared_from_this()](boost::system::error_code ec) {
                if (ec) return self->owner.drop(self->id, ec.message());
                self->read();
            });
        }

        void read() {
            ws.async_read(buf, [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                if (ec) return self->owner.drop(self->id, ec.message());
                auto text = ws_detail::beast::buffers_to_string(self->buf.data());
                self->buf.consume(self->buf.size());
                self->owner.deliver(self->owner.server_.on_text(self->id, text, self->owner.now()));
                if (!self->dead) self->read();
            });
        }

        /// Queues a frame; false when the peer is too far behind.
        bool send(std::string text) {
            if (dead || closing) return false;
            if (queue.size() >= owner.ws_.max_queue) return false;
            queue.push_back(std::move(text));
            if (!writing) write();
            return true;
        }

        void write() {
            if (queue.empty()) {
                writing = false;
                if (closing) close_now();
                return;
            }
            writing = true;
            ws.async_write(ws_detail::asio::buffer(queue.front()),
                           [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                               if (ec) return self->owner.drop(self->id, ec.message());
                               self->queue.pop_front();
                               self->write();
                           });
        }

        void close_now() {
            if (dead) return;
            dead = true;
            ws.async_close(ws_detail::websocket::close_code::normal,
                           [self = shared_from_this()](boost::system::error_code) {});
        }
    };

    TimeMs now() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_)
            .count();
    }

    void log(const std::string& s) const {
        if (log_) log_(s);
    }

    void accept() {
        acceptor_.async_accept([this](boost::system::error_code ec, ws_detail::tcp::socket sock) {
            if (ec) {
                if (ec != ws_detail::asio::error::operation_aborted) log("accept failed: " + ec.message());
                return;
            }
            const ConnId id = ++next_conn_;
            auto c = std::make_shared<Conn>(std::move(sock), id, *this);
            conns_[id] = c;
            log("connection " + std::to_string(id) + " opened");
            c->run();
            accept();
        });
    }

    void drop(ConnId id, const std::string& why) {
        auto it = conns_.find(id);
        if (it == conns_.end()) return;
        auto c = it->second;
        conns_.erase(it);
        c->dead = true;
        log("connection " + std::to_string(id) + " closed: " + why);
        deliver(server_.on_close(id, now()));
    }

    void deliver(const Outbox& out) {
        for (const auto& o : out) {
            auto it = conns_.find(o.to);
            if (it == conns_.end()) continue;
            auto c = it->second;
            if (!o.text.empty()) c->send(o.text);
            if (o.close) {
                c->closing = true;
                if (!c->writing) c->close_now();
                conns_.erase(o.to);
            }
        }
    }

    void schedule_tick(std::chrono::steady_clock::time_point at) {
        const auto period = std::chrono::milliseconds(server_.config().tick_ms);
        at += period;
        timer_.expires_at(at);
        timer_.async_wait([this, at](boost::system::error_code ec) {
            if (ec) return;
            tick();
            // skip missed deadlines rather than bursting
            auto next = at;
            const auto t = std::chrono::steady_clock::now();
            const auto period = std::chrono::milliseconds(server_.config().tick_ms);
            while (next + period < t) next += period;
            schedule_tick(next);
        });
    }

    void tick() {
        const TimeMs t = now();
        const auto out = server_.tick(t);
        // a tick broadcast that cannot be queued counts as a missed delivery
        std::map<ConnId, bool> delivered;
        for (const auto& o : out) {
            auto it = conns_.find(o.to);
            if (it == conns_.end()) continue;
            const bool ok = it->second->send(o.text);
            auto [d, fresh] = delivered.try_emplace(o.to, ok);
            if (!fresh) d->second = d->second && ok;
        }
        for (const auto& [id, ok] : delivered) deliver(server_.on_delivery(id, ok, t));
    }

    ws_detail::asio::io_context& ioc_;
    WsConfig ws_;
    RelayServer server_;
    ws_detail::tcp::acceptor acceptor_;
    ws_detail::asio::steady_timer timer_;
    Logger log_;
    std::chrono::steady_clock::time_point start_;
    std::map<ConnId, std::shared_ptr<Conn>> conns_;
    ConnId next_conn_ = 0;
};

} // namespace eyeline::relay

#endif // EYELINE_RELAY_WS_TRANSPORT_HPP
