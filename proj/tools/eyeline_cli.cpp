// eyeline: relay server, session recorder, replay, metrics and simulator.

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "eyeline/record/event_log.hpp"
#include "eyeline/record/metrics.hpp"
#include "eyeline/record/replay.hpp"
#include "eyeline/relay/ws_transport.hpp"
#include "eyeline/sim/runner.hpp"

namespace {

using namespace eyeline;
using json = nlohmann::json;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = boost::beast::websocket;
using tcp = asio::ip::tcp;

const std::map<std::string, spdlog::level::level_enum> kLevels{
    {"trace", spdlog::level::trace}, {"debug", spdlog::level::debug}, {"info", spdlog::level::info},
    {"warn", spdlog::level::warn},   {"error", spdlog::level::err},   {"off", spdlog::level::off}};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw Error("cannot write " + path);
}

/// Writes to a file, or stdout when the path is empty or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) throw Error("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

// ---------------------------------------------------------------- serve

struct ServeOptions {
    std::string bind = "0.0.0.0";
    std::uint16_t port = 8765;
    TimeMs tick_ms = 16;
    std::size_t capacity = 12;
    std::string record;
    std::string mode = "directional";
    std::string fsync = "close";
};

/// "{session}" in the path is replaced by the session id; without it, the
/// first session gets the path as is and later ones get ".<session>" appended.
std::string record_path(const std::string& pattern, const std::string& session, bool first) {
    if (auto pos = pattern.find("{session}"); pos != std::string::npos)
        return pattern.substr(0, pos) + session + pattern.substr(pos + 9);
    return first ? pattern : pattern + "." + session;
}

int serve(const ServeOptions& o) {
    relay::SessionConfig cfg;
    cfg.tick_ms = o.tick_ms;
    cfg.capacity = o.capacity;
    cfg.mode = layout::parse_layout_mode(o.mode);
    const auto policy = o.fsync == "every" ? record::FsyncPolicy::every_record
                        : o.fsync == "never" ? record::FsyncPolicy::never
                                             : record::FsyncPolicy::on_close;

    // Called once per session creation. A session id that comes back after
    // its session emptied starts a new log with a numbered suffix.
    std::vector<std::unique_ptr<record::LogWriter>> writers;
    std::map<std::string, int> incarnations;
    relay::RelayServer::SinkFactory sinks;
    if (!o.record.empty()) {
        sinks = [&](const std::string& session) -> relay::EventSink* {
            const int n = ++incarnations[session];
            const auto name = n == 1 ? session : session + "-" + std::to_string(n);
            const auto path = record_path(o.record, name, writers.empty());
            writers.push_back(std::make_unique<record::LogWriter>(
                path, record::LogHeader::for_config(record::session_config_json(cfg)), policy));
            spdlog::info("recording session '{}' to {}", session, path);
            return writers.back().get();
        };
    }

    asio::io_context ioc;
    relay::WsRelay relay(ioc, relay::WsConfig{o.bind, o.port, 64}, cfg, sinks,
                         [](const std::string& s) { spdlog::debug("{}", s); });
    relay.start();
    spdlog::info("relay listening on {}:{} (tick {} ms, capacity {}, mode {})", o.bind, relay.port(), o.tick_ms,
                 o.capacity, o.mode);

    asio::signal_set signals(ioc, SIGINT, SIGTERM);
    signals.async_wait([&](boost::system::error_code, int sig) {
        spdlog::info("signal {}, shutting down", sig);
        relay.stop();
        ioc.stop();
    });
    ioc.run();
    for (auto& w : writers) w->close();
    return 0;
}

// ---------------------------------------------------------------- record

struct RecordOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = 8765;
    std::string session = "default";
    std::string observe;
    std::string mode = "directional";
    double duration_s = 0.0; // 0 = until interrupted
    std::string out;
};

/// Attaches to a relay as the host and logs everything it receives. The
/// state broadcasts in the log replay to the same frames the relay renders.
int record_session(const RecordOptions& o) {
    asio::io_context ioc;
    tcp::resolver resolver(ioc);
    websocket::stream<tcp::socket> ws(ioc);
    asio::connect(ws.next_layer(), resolver.resolve(o.host, std::to_string(o.port)));
    ws.handshake(o.host, "/");
    ws.text(true);
    ws.write(asio::buffer(relay::make_join(o.session, relay::Role::host).dump()));

    const auto start = std::chrono::steady_clock::now();
    auto now_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    };
    std::unique_ptr<record::LogWriter> writer;
    beast::flat_buffer buf;
    bool stop = false;

    asio::signal_set signals(ioc, SIGINT, SIGTERM);
    signals.async_wait([&](boost::system::error_code ec, int) {
        if (!ec) stop = true;
        beast::get_lowest_layer(ws).cancel();
    });
    asio::steady_timer deadline(ioc);
    if (o.duration_s > 0.0) {
        deadline.expires_after(std::chrono::milliseconds(static_cast<long>(o.duration_s * 1000.0)));
        deadline.async_wait([&](boost::system::error_code ec) {
            if (ec) return;
            stop = true;
            beast::get_lowest_layer(ws).cancel();
        });
    }

    std::function<void()> read = [&] {
        ws.async_read(buf, [&](boost::system::error_code ec, std::size_t) {
            if (ec) {
                if (!stop) spdlog::warn("connection ended: {}", ec.message());
                stop = true;
                signals.cancel();
                deadline.cancel();
                return;
            }
            const auto msg = json::parse(beast::buffers_to_string(buf.data()));
            buf.consume(buf.size());
            const std::string kind = msg.value("kind", "unknown");
            if (kind == relay::kind::welcome && !writer) {
                relay::SessionConfig cfg;
                cfg.tick_ms = msg.value("tick_ms", cfg.tick_ms);
                cfg.mode = layout::parse_layout_mode(o.mode);
                writer = std::make_unique<record::LogWriter>(
                    o.out, record::LogHeader::for_config(record::session_config_json(cfg)));
                spdlog::info("joined '{}' as {}, recording to {}", o.session, msg.value("id", "?"), o.out);
                if (!o.observe.empty())
                    ws.write(asio::buffer(relay::make_observe(ClientId(o.observe)).dump()));
            } else if (kind == relay::kind::error) {
                spdlog::warn("relay error {}: {}", msg.value("code", ""), msg.value("message", ""));
            }
            if (writer) writer->append(now_ms(), kind, msg);
            read();
        });
    };
    read();
    ioc.run();
    if (writer) {
        writer->close();
        spdlog::info("wrote {} records", writer->records_written());
    }
    return writer ? 0 : 1;
}

// ---------------------------------------------------------------- replay / metrics

int replay_log(const std::string& path, const std::string& viewer, const std::string& mode, const std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    Output o(out);
    std::vector<record::ReplayFrame> frames;
    try {
        record::replay(in, ClientId(viewer), layout::parse_layout_mode(mode), frames);
    } catch (const record::LogCorrupt& e) {
        for (const auto& f : frames) o.stream() << json{{"tick", f.tick}, {"frame", f.frame}}.dump() << '\n';
        throw;
    }
    for (const auto& f : frames) o.stream() << json{{"tick", f.tick}, {"frame", f.frame}}.dump() << '\n';
    spdlog::info("{} frames for viewer {}", frames.size(), viewer);
    return 0;
}

int metrics(const std::string& path, bool attention, bool mutual, const std::string& attention_out,
            const std::string& mutual_out) {
    if (!attention && !mutual) attention = mutual = true;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    const auto log = record::read_log(in);
    if (attention) {
        Output o(attention_out);
        o.stream().precision(17);
        record::write_attention_csv(o.stream(), record::attention_matrix(log));
    }
    if (mutual) {
        if (attention && mutual_out.empty() && attention_out.empty()) std::cout << '\n';
        Output o(mutual_out);
        record::write_mutual_csv(o.stream(), record::mutual_gaze_episodes(log));
    }
    return 0;
}

// ---------------------------------------------------------------- sim

sim::Scenario load_scenario(const std::string& path) {
    try {
        return sim::scenario_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

int sim_run(const std::string& scenario, const std::string& report, const std::string& log_out,
            const std::string& frames_out) {
    const auto sc = load_scenario(scenario);
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = sim::run_scenario(sc);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Output o(report);
    o.stream() << json(res.report).dump(2) << '\n';
    if (!log_out.empty()) write_file(log_out, res.log.to_ndjson());
    if (!frames_out.empty()) {
        Output f(frames_out);
        for (const auto& fr : res.live_frames) f.stream() << json{{"tick", fr.tick}, {"frame", fr.frame}}.dump() << '\n';
    }
    spdlog::info("{} members, {} ms simulated in {:.2f} s: min accuracy {:.4f}, max convergence {} ticks{}",
                 sc.members, sc.duration_ms, secs, res.report.min_accuracy, res.report.max_convergence_ticks,
                 res.report.converged ? "" : " (some clients never converged)");
    return 0;
}

int sim_sweep(const std::string& scenario, const std::vector<double>& fracs, int seeds, const std::string& out) {
    const auto base = load_scenario(scenario);
    const double tile_w = sim::default_tile_width(base.members, base.render);
    json j = json::parse(read_file(scenario));
    auto gen = j.value("script_gen", json::object());
    Output o(out);
    o.stream() << "sigma_frac,sigma_px,seed,min_accuracy,mean_accuracy\n";
    o.stream().precision(6);
    for (double frac : fracs) {
        for (int k = 1; k <= seeds; ++k) {
            auto sc = base;
            sc.seed = static_cast<std::uint64_t>(k);
            sc.noise_sigma = frac * tile_w;
            if (!j.contains("scripts"))
                sc.scripts = sim::random_scripts(sc.members, sc.duration_ms, sc.tick_ms,
                                                 gen.value("min_ms", TimeMs{2000}), gen.value("max_ms", TimeMs{6000}),
                                                 gen.value("none_prob", 0.15), sc.seed);
            const auto r = sim::run_scenario(sc).report;
            o.stream() << frac << ',' << sc.noise_sigma << ',' << k << ',' << r.min_accuracy << ','
                       << r.mean_accuracy << '\n';
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"eyeline: gaze-aware conferencing relay, recorder and simulator"};
    app.require_subcommand(1);
    app.fallthrough(); // global options may follow the subcommand
    std::string level = "info";
    app.add_option("--log-level", level, "trace|debug|info|warn|error|off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    ServeOptions so;
    auto* serve_cmd = app.add_subcommand("serve", "run the WebSocket relay");
    serve_cmd->add_option("--bind", so.bind, "listen address");
    serve_cmd->add_option("--port", so.port, "listen port (0 = any free port)");
    serve_cmd->add_option("--tick-ms", so.tick_ms, "broadcast interval")->check(CLI::PositiveNumber);
    serve_cmd->add_option("--capacity", so.capacity, "participants per session")->check(CLI::PositiveNumber);
    serve_cmd->add_option("--record", so.record, "write each session's event log here");
    serve_cmd->add_option("--mode", so.mode, "layout mode for host snapshots (baseline|directional|perspective)");
    serve_cmd->add_option("--fsync", so.fsync, "log durability: every|close|never")
        ->check(CLI::IsMember({"every", "close", "never"}));

    RecordOptions ro;
    auto* record_cmd = app.add_subcommand("record", "attach to a relay as host and record the session");
    record_cmd->add_option("--host", ro.host, "relay address");
    record_cmd->add_option("--port", ro.port, "relay port");
    record_cmd->add_option("--session", ro.session, "session id");
    record_cmd->add_option("--observe", ro.observe, "also stream snapshots for this participant");
    record_cmd->add_option("--mode", ro.mode, "layout mode recorded in the log header");
    record_cmd->add_option("--duration", ro.duration_s, "seconds to record (default: until interrupted)");
    record_cmd->add_option("-o,--out", ro.out, "log file")->required();

    std::string replay_path, viewer, mode = "directional", replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "re-render one viewer's frames from a log (NDJSON)");
    replay_cmd->add_option("log", replay_path, "session log")->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--viewer", viewer, "participant id")->required();
    replay_cmd->add_option("--mode", mode, "baseline|directional|perspective (b|dir|persp)");
    replay_cmd->add_option("-o,--out", replay_out, "output file (default stdout)");

    std::string metrics_path, attention_out, mutual_out;
    bool attention = false, mutual = false;
    auto* metrics_cmd = app.add_subcommand("metrics", "attention matrix and mutual-gaze episodes as CSV");
    metrics_cmd->add_option("log", metrics_path, "session log")->required()->check(CLI::ExistingFile);
    metrics_cmd->add_flag("--attention", attention, "attention matrix");
    metrics_cmd->add_flag("--mutual", mutual, "mutual-gaze episodes");
    metrics_cmd->add_option("--attention-out", attention_out, "file for the matrix (default stdout)");
    metrics_cmd->add_option("--mutual-out", mutual_out, "file for the episodes (default stdout)");

    auto* sim_cmd = app.add_subcommand("sim", "discrete-event simulation");
    sim_cmd->require_subcommand(1);
    std::string scenario, report, sim_log, sim_frames;
    auto* run_cmd = sim_cmd->add_subcommand("run", "run one scenario");
    run_cmd->add_option("scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--report", report, "report JSON (default stdout)");
    run_cmd->add_option("--log", sim_log, "also write the relay's event log");
    run_cmd->add_option("--frames", sim_frames, "also write the host's live snapshots (NDJSON)");

    std::vector<double> fracs{0.0, 0.05, 0.1, 0.125, 0.15, 0.2};
    int seeds = 5;
    std::string sweep_out;
    auto* sweep_cmd = sim_cmd->add_subcommand("sweep", "accuracy against noise, as CSV");
    sweep_cmd->add_option("scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--sigma-fracs", fracs, "noise as fractions of tile width")->delimiter(',');
    sweep_cmd->add_option("--seeds", seeds, "seeds per noise level")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("-o,--out", sweep_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_default_logger(spdlog::stderr_logger_mt("eyeline"));
    spdlog::set_level(kLevels.at(level));

    try {
        if (*serve_cmd) return serve(so);
        if (*record_cmd) return record_session(ro);
        if (*replay_cmd) return replay_log(replay_path, viewer, mode, replay_out);
        if (*metrics_cmd) return metrics(metrics_path, attention, mutual, attention_out, mutual_out);
        if (*run_cmd) return sim_run(scenario, report, sim_log, sim_frames);
        if (*sweep_cmd) return sim_sweep(scenario, fracs, seeds, sweep_out);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
