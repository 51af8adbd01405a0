#ifndef EYELINE_RECORD_METRICS_HPP
#define EYELINE_RECORD_METRICS_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "eyeline/record/event_log.hpp"
#include "eyeline/relay/protocol.hpp"

namespace eyeline::record {

/// One logged tick and the span of session time it stands for.
struct TickSpan {
    TimeMs start = 0;
    TimeMs end = 0;
    relay::StateView state;
};

/// Each state record holds until the next one; the last holds for one tick.
inline std::vector<TickSpan> tick_spans(const EventLog& log) {
    const TimeMs tick_ms = session_config_from(log.header().config).tick_ms;
    std::vector<TickSpan> spans;
    for (const auto& r : log.records()) {
        if (r.kind != relay::kind::state) continue;
        if (!spans.empty()) spans.back().end = r.wall_t;
        spans.push_back({r.wall_t, r.wall_t + tick_ms, relay::parse_state(r.payload)});
    }
    return spans;
}

/// cells[i][j]: fraction of session time member i looked at member j.
/// idle[i]: fraction spent looking at no one or not present.
struct AttentionMatrix {
    std::vector<ClientId> members;
    std::vector<std::vector<double>> cells;
    std::vector<double> idle;
    TimeMs duration_ms = 0;

    std::size_t index_of(const ClientId& id) const {
        auto it = std::find(members.begin(), members.end(), id);
        if (it == members.end()) throw Error("no member " + id.str() + " in matrix");
        return static_cast<std::size_t>(it - members.begin());
    }

    double at(const ClientId& from, const ClientId& to) const { return cells[index_of(from)][index_of(to)]; }
};

inline AttentionMatrix attention_matrix(const EventLog& log) {
    const auto spans = tick_spans(log);
    if (spans.empty()) throw InsufficientData("log has no ticks");

    AttentionMatrix m;
    for (const auto& s : spans)
        for (const auto& id : s.state.members)
            if (std::find(m.members.begin(), m.members.end(), id) == m.members.end()) m.members.push_back(id);

    const std::size_t n = m.members.size();
    std::vector<std::vector<TimeMs>> looked(n, std::vector<TimeMs>(n, 0));
    std::vector<TimeMs> idle(n, 0);
    m.duration_ms = spans.back().end - spans.front().start;
    if (m.duration_ms <= 0) throw InsufficientData("log covers no time");

    std::map<ClientId, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[m.members[i]] = i;

    for (const auto& s : spans) {
        const TimeMs d = s.end - s.start;
        std::vector<bool> busy(n, false);
        for (const auto& [src, tgt] : s.state.edges) {
            if (!tgt || *tgt == src) continue;
            auto ti = index.find(*tgt);
            if (ti == index.end()) continue;
            const auto si = index.at(src);
            looked[si][ti->second] += d;
            busy[si] = true;
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!busy[i]) idle[i] += d;
    }

    const auto total = static_cast<double>(m.duration_ms);
    m.cells.assign(n, std::vector<double>(n, 0.0));
    m.idle.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m.cells[i][j] = static_cast<double>(looked[i][j]) / total;
        m.idle[i] = static_cast<double>(idle[i]) / total;
    }
    return m;
}

struct MutualEpisode {
    ClientId a; // a < b
    ClientId b;
    TimeMs start = 0;
    TimeMs end = 0;

    friend bool operator==(const MutualEpisode&, const MutualEpisode&) = default;
};

/// Maximal intervals during which a looks at b and b looks at a.
inline std::vector<MutualEpisode> mutual_gaze_episodes(const EventLog& log) {
    const auto spans = tick_spans(log);
    std::map<std::pair<ClientId, ClientId>, TimeMs> open;
    std::vector<MutualEpisode> out;

    auto mutual_pairs = [](const relay::StateView& st) {
        std::vector<std::pair<ClientId, ClientId>> pairs;
        for (const auto& [a, ta] : st.edges) {
            if (!ta || !(a < *ta)) continue;
            auto it = st.edges.find(*ta);
            if (it != st.edges.end() && it->second && *it->second == a) pairs.emplace_back(a, *ta);
        }
        return pairs;
    };

    for (const auto& s : spans) {
        const auto now = mutual_pairs(s.state);
        for (auto it = open.begin(); it != open.end();) {
            if (std::find(now.begin(), now.end(), it->first) == now.end()) {
                out.push_back({it->first.first, it->first.second, it->second, s.start});
                it = open.erase(it);
            } else {
                ++it;
            }
        }
        for (const auto& p : now) open.try_emplace(p, s.start);
    }
    const TimeMs end = spans.empty() ? 0 : spans.back().end;
    for (const auto& [p, start] : open) out.push_back({p.first, p.second, start, end});

    std::sort(out.begin(), out.end(), [](const MutualEpisode& x, const MutualEpisode& y) {
        return std::tie(x.start, x.a, x.b) < std::tie(y.start, y.a, y.b);
    });
    return out;
}

inline void write_attention_csv(std::ostream& os, const AttentionMatrix& m) {
    os << "source";
    for (const auto& id : m.members) os << ',' << id.str();
    os << ",idle\n";
    for (std::size_t i = 0; i < m.members.size(); ++i) {
        os << m.members[i].str();
        for (double v : m.cells[i]) os << ',' << v;
        os << ',' << m.idle[i] << '\n';
    }
}

inline void write_mutual_csv(std::ostream& os, const std::vector<MutualEpisode>& eps) {
    os << "a,b,start_ms,end_ms\n";
    for (const auto& e : eps) os << e.a.str() << ',' << e.b.str() << ',' << e.start << ',' << e.end << '\n';
}

} // namespace eyeline::record

#endif // EYELINE_RECORD_METRICS_HPP
