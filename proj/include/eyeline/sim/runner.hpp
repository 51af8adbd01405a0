#ifndef EYELINE_SIM_RUNNER_HPP
#define EYELINE_SIM_RUNNER_HPP

// Deterministic discrete-event simulation of one session: scripted clients
// run the gaze pipeline, talk to an in-process relay over a modelled network,
// and the results are scored against the scripts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "eyeline/gaze/pipeline.hpp"
#include "eyeline/layout/grid.hpp"
#include "eyeline/record/event_log.hpp"
#include "eyeline/record/replay.hpp"
#include "eyeline/relay/server.hpp"
#include "eyeline/sim/scenario.hpp"
#include "eyeline/sim/trace.hpp"

namespace eyeline::sim {

struct SimReport {
    std::vector<double> accuracy;           // per member, join order
    std::vector<std::uint64_t> scored_samples;
    double mean_accuracy = 0.0;
    double min_accuracy = 0.0;
    std::uint64_t state_changes = 0;        // ticks at which the server edge map changed
    double mean_convergence_ticks = 0.0;    // over converged (change, client) pairs
    std::uint64_t max_convergence_ticks = 0;
    std::uint64_t unconverged = 0;          // (change, client) pairs that never converged
    bool converged = true;
    double filter_lag_ms = 0.0;
    std::uint64_t messages_sent = 0;
    std::uint64_t messages_dropped = 0;
    std::uint64_t ticks = 0;
    std::uint64_t samples = 0;

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

inline void to_json(json& j, const SimReport& r) {
    j = {{"accuracy", r.accuracy},
         {"scored_samples", r.scored_samples},
         {"mean_accuracy", r.mean_accuracy},
         {"min_accuracy", r.min_accuracy},
         {"state_changes", r.state_changes},
         {"mean_convergence_ticks", r.mean_convergence_ticks},
         {"max_convergence_ticks", r.max_convergence_ticks},
         {"unconverged", r.unconverged},
         {"converged", r.converged},
         {"filter_lag_ms", r.filter_lag_ms},
         {"messages_sent", r.messages_sent},
         {"messages_dropped", r.messages_dropped},
         {"ticks", r.ticks},
         {"samples", r.samples}};
}

struct SimResult {
    SimReport report;
    std::vector<ClientId> members;              // join order
    OptClient observed;                         // host's observe target, if any
    record::EventLog log;                       // what a recording relay wrote
    std::vector<record::ReplayFrame> live_frames; // snapshots the host received
};

namespace detail {

/// Latency/jitter/loss applied per message; one RNG so runs are reproducible.
class Network {
public:
    Network(NetConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

    /// Arrival time, or nothing when the message is lost.
    std::optional<double> transit(double now) {
        ++sent_;
        // always draw both numbers so the stream does not depend on outcomes
        const double u_loss = unit_(rng_);
        const double u_jit = unit_(rng_);
        if (u_loss < cfg_.loss) {
            ++dropped_;
            return std::nullopt;
        }
        return now + std::max(0.0, cfg_.latency_ms + cfg_.jitter_ms * (2.0 * u_jit - 1.0));
    }

    std::uint64_t sent() const noexcept { return sent_; }
    std::uint64_t dropped() const noexcept { return dropped_; }

private:
    NetConfig cfg_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
};

enum class EvType { sample, deliver_to_server, deliver_to_client, tick };

struct Event {
    double t = 0.0;
    std::uint64_t order = 0;
    EvType type = EvType::sample;
    std::size_t who = 0; // member index
    std::string text;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        return a.t != b.t ? a.t > b.t : a.order > b.order;
    }
};

/// Every member keyed, absent edges as null.
inline layout::EdgeMap full_map(const std::vector<ClientId>& members, const layout::EdgeMap& edges) {
    layout::EdgeMap m;
    for (const auto& id : members) {
        auto it = edges.find(id);
        m[id] = it != edges.end() ? it->second : std::nullopt;
    }
    return m;
}

} // namespace detail

/// Runs a scenario to completion in virtual time.
///
/// Clients sample at k * tick; the relay ticks half a tick later. Joins are
/// reliable; gaze, audio and state messages go through the network model.
/// The host link (when `observe` is set) is local and lossless.
///
/// Accuracy is the fraction of samples whose debounced target equals the
/// script, skipping one dwell period after every scripted change. For each
/// tick at which the server's edge map changes, a client's convergence time
/// is the number of ticks until its latest received broadcast equals the
/// server's map at that tick; the server keeps ticking for `drain_ticks`
/// after the clients stop so late changes can settle.
inline SimResult run_scenario(const Scenario& sc) {
    sc.validate();
    using detail::EvType;

    relay::SessionConfig cfg;
    cfg.tick_ms = sc.tick_ms;
    cfg.capacity = std::max<std::size_t>(12, sc.members);
    cfg.mode = sc.mode;
    cfg.render = sc.render;
    record::MemorySink sink(record::LogHeader::for_config(record::session_config_json(cfg)));
    relay::RelayServer server(cfg, [&](const std::string&) -> relay::EventSink* { return &sink; });
    const std::string sid = "sim";

    // joins at t = 0
    SimResult res;
    const std::size_t n = sc.members;
    for (std::size_t i = 0; i < n; ++i) {
        auto out = server.on_text(i + 1, relay::make_join(sid, relay::Role::participant).dump(), 0);
        for (const auto& o : out) {
            auto m = json::parse(o.text);
            if (o.to == i + 1 && m["kind"] == relay::kind::welcome) res.members.emplace_back(m["id"].get<std::string>());
        }
    }
    if (res.members.size() != n) throw Error("not every simulated client was admitted");
    auto& session = *server.session(sid);

    const relay::ConnId host_conn = n + 1000;
    if (sc.observe) {
        server.on_text(host_conn, relay::make_join(sid, relay::Role::host).dump(), 0);
        res.observed = res.members[*sc.observe];
        server.on_text(host_conn, relay::make_observe(res.observed).dump(), 0);
    }

    // per-client layout, trace, pipeline
    const auto& rc = sc.render;
    std::vector<TileLayout> layouts;
    std::vector<std::vector<gaze::GazeSample>> traces;
    std::vector<gaze::GazePipeline> pipes;
    std::vector<std::vector<TraceSegment>> truth(n);
    for (std::size_t i = 0; i < n; ++i) {
        layouts.push_back(layout::compute_tile_layout(res.members, res.members[i], rc.screen_w, rc.screen_h, rc.grid));
        for (const auto& seg : sc.scripts[i])
            truth[i].push_back({seg.start, seg.end, seg.target ? OptClient(res.members[*seg.target]) : std::nullopt});
        traces.push_back(generate_trace(truth[i], layouts[i], sc.noise_sigma, sc.tick_ms,
                                        sc.seed * 0x9e3779b97f4a7c15ull + i + 1));
        pipes.emplace_back(res.members[i], gaze::PipelineConfig{sc.filter, sc.dwell_ms});
    }

    // audio: piecewise-constant levels per second, speaking about a third of the time
    std::mt19937_64 audio_rng(sc.seed ^ 0xa0d10a0d10ull);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto seconds = static_cast<std::size_t>(sc.duration_ms / 1000 + 1);
    std::vector<std::vector<double>> levels(n, std::vector<double>(seconds));
    for (auto& row : levels)
        for (auto& v : row) v = unit(audio_rng) < 0.33 ? 0.2 + 0.7 * unit(audio_rng) : 0.04 * unit(audio_rng);

    detail::Network net(sc.net, sc.seed ^ 0x5eed5eed5eedull);
    std::priority_queue<detail::Event, std::vector<detail::Event>, detail::Later> q;
    std::uint64_t order = 0;
    auto push = [&](double t, EvType type, std::size_t who, std::string text = {}) {
        q.push({t, order++, type, who, std::move(text)});
    };

    const TimeMs T = sc.tick_ms;
    const auto samples = static_cast<std::size_t>((sc.duration_ms + T - 1) / T);
    const auto total_ticks = static_cast<std::uint64_t>(samples) + static_cast<std::uint64_t>(sc.drain_ticks);
    for (std::size_t k = 0; k < samples; ++k)
        for (std::size_t i = 0; i < n; ++i) push(static_cast<double>(k) * T, EvType::sample, i);
    for (std::uint64_t k = 0; k < total_ticks; ++k)
        push(static_cast<double>(k) * T + static_cast<double>(T) / 2.0, EvType::tick, 0);

    // scoring state
    std::vector<std::uint64_t> correct(n, 0), scored(n, 0);
    std::vector<std::uint64_t> seq(n, 0);
    std::vector<std::optional<std::uint64_t>> view_tick(n);
    std::vector<layout::EdgeMap> view(n);
    std::vector<layout::EdgeMap> server_maps{layout::EdgeMap{}}; // index = tick number
    std::vector<std::vector<bool>> consistent(n, std::vector<bool>{false});

    auto route = [&](const relay::Outbox& out, double now) {
        for (const auto& o : out) {
            if (o.to == host_conn) {
                auto m = json::parse(o.text);
                if (m["kind"] == relay::kind::snapshot)
                    res.live_frames.push_back({m["tick"].get<std::uint64_t>(), m["frame"].get<layout::RenderFrame>()});
                continue;
            }
            if (o.text.empty()) continue;
            if (auto at = net.transit(now)) push(*at, EvType::deliver_to_client, static_cast<std::size_t>(o.to - 1), o.text);
        }
    };

    auto record_consistency = [&] {
        const auto& server_now = server_maps.back();
        for (std::size_t i = 0; i < n; ++i) consistent[i].push_back(view_tick[i] && view[i] == server_now);
    };

    while (!q.empty()) {
        auto ev = q.top();
        q.pop();
        const auto now = static_cast<TimeMs>(std::floor(ev.t));
        switch (ev.type) {
        case EvType::sample: {
            const std::size_t i = ev.who;
            const std::size_t k = static_cast<std::size_t>(ev.t) / static_cast<std::size_t>(T);
            const auto& s = traces[i][k];
            const auto outp = pipes[i].push(s, layouts[i]);

            auto seg = std::find_if(truth[i].begin(), truth[i].end(),
                                    [&](const TraceSegment& g) { return s.t >= g.start && s.t < g.end; });
            if (s.t - seg->start >= sc.dwell_ms) {
                ++scored[i];
                if (outp.target == seg->target) ++correct[i];
            }

            const auto gz = relay::make_gaze(++seq[i], res.members[i], outp.target, s.t).dump();
            if (auto at = net.transit(ev.t)) push(*at, EvType::deliver_to_server, i, gz);
            const double lv = levels[i][static_cast<std::size_t>(s.t / 1000)];
            const auto au = relay::make_audio(seq[i], res.members[i], lv).dump();
            if (auto at = net.transit(ev.t)) push(*at, EvType::deliver_to_server, i, au);
            break;
        }
        case EvType::deliver_to_server:
            route(server.on_text(ev.who + 1, ev.text, now), ev.t);
            break;
        case EvType::deliver_to_client: {
            const auto m = json::parse(ev.text);
            if (m.value("kind", "") != relay::kind::state) break;
            auto st = relay::parse_state(m);
            auto& vt = view_tick[ev.who];
            if (!vt || st.tick > *vt) {
                vt = st.tick;
                view[ev.who] = detail::full_map(st.members, st.edges);
            }
            break;
        }
        case EvType::tick:
            if (server_maps.size() > 1) record_consistency();
            route(server.tick(now), ev.t);
            server_maps.push_back(detail::full_map(session.members(), session.edges()));
            break;
        }
    }
    record_consistency();

    SimReport& r = res.report;
    r.samples = samples;
    r.ticks = total_ticks;
    r.accuracy.resize(n);
    r.scored_samples = scored;
    r.min_accuracy = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        r.accuracy[i] = scored[i] ? static_cast<double>(correct[i]) / static_cast<double>(scored[i]) : 1.0;
        r.mean_accuracy += r.accuracy[i] / static_cast<double>(n);
        r.min_accuracy = std::min(r.min_accuracy, r.accuracy[i]);
    }

    // convergence: consistent[i][j] says whether client i matched the map of tick j
    const std::size_t last = server_maps.size() - 1;
    double sum = 0.0;
    std::uint64_t pairs = 0;
    for (std::size_t j = 1; j <= last; ++j) {
        if (j > 1 && server_maps[j] == server_maps[j - 1]) continue;
        ++r.state_changes;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t d = j;
            while (d <= last && !consistent[i][d]) ++d;
            if (d > last) {
                ++r.unconverged;
                continue;
            }
            sum += static_cast<double>(d - j);
            r.max_convergence_ticks = std::max<std::uint64_t>(r.max_convergence_ticks, d - j);
            ++pairs;
        }
    }
    r.mean_convergence_ticks = pairs ? sum / static_cast<double>(pairs) : 0.0;
    r.converged = r.unconverged == 0;
    r.filter_lag_ms = measure_filter_lag(sc.filter, sc.tick_ms);
    r.messages_sent = net.sent();
    r.messages_dropped = net.dropped();

    res.log = sink.log();
    return res;
}

} // namespace eyeline::sim

#endif // EYELINE_SIM_RUNNER_HPP
