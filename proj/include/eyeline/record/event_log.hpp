#ifndef EYELINE_RECORD_EVENT_LOG_HPP
#define EYELINE_RECORD_EVENT_LOG_HPP

// Append-only session log: newline-delimited JSON. The first line is a
// header carrying the schema version and the render/relay config (plus its
// hash); every following line is one event record.

#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "eyeline/core.hpp"
#include "eyeline/layout/config_json.hpp"
#include "eyeline/relay/session.hpp"

namespace eyeline::record {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Malformed or truncated log line. `line` is 1-based, `offset` is the byte
/// offset of the start of that line.
class LogCorrupt : public Error {
public:
    LogCorrupt(std::size_t line, std::size_t offset, const std::string& what)
        : Error("log corrupt at line " + std::to_string(line) + " (byte " + std::to_string(offset) +
                "): " + what),
          line_(line), offset_(offset) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t line_;
    std::size_t offset_;
};

struct EventRecord {
    TimeMs wall_t = 0;     // ms since session epoch
    std::uint64_t seq = 0; // arrival order
    std::string kind;
    json payload;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

inline std::string serialize(const EventRecord& r) {
    return json{{"wall_t", r.wall_t}, {"seq", r.seq}, {"kind", r.kind}, {"payload", r.payload}}.dump();
}

inline std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

struct LogHeader {
    int schema = kSchemaVersion;
    json config = json::object();
    std::string config_hash;

    static LogHeader for_config(const json& config) {
        return {kSchemaVersion, config, hex64(fnv1a64(config.dump()))};
    }

    friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

inline json session_config_json(const relay::SessionConfig& cfg) {
    return {{"tick_ms", cfg.tick_ms}, {"mode", layout::to_string(cfg.mode)}, {"render", cfg.render}};
}

inline relay::SessionConfig session_config_from(const json& j) {
    relay::SessionConfig cfg;
    cfg.tick_ms = j.value("tick_ms", cfg.tick_ms);
    if (auto m = j.find("mode"); m != j.end()) cfg.mode = layout::parse_layout_mode(m->get<std::string>());
    if (auto r = j.find("render"); r != j.end()) cfg.render = r->get<layout::RenderConfig>();
    return cfg;
}

inline std::string serialize(const LogHeader& h) {
    return json{{"schema", h.schema}, {"config_hash", h.config_hash}, {"config", h.config}}.dump();
}

/// In-memory log. Appends must not go back in time.
class EventLog {
public:
    EventLog() = default;
    explicit EventLog(LogHeader header) : header_(std::move(header)) {}

    const EventRecord& append(EventRecord r) {
        if (!records_.empty() && r.wall_t < records_.back().wall_t)
            throw OrderingViolation("event at " + std::to_string(r.wall_t) + " ms precedes " +
                                    std::to_string(records_.back().wall_t) + " ms");
        r.seq = records_.size();
        records_.push_back(std::move(r));
        return records_.back();
    }

    const LogHeader& header() const noexcept { return header_; }
    const std::vector<EventRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    std::string to_ndjson() const {
        std::string out = serialize(header_) + '\n';
        for (const auto& r : records_) out += serialize(r) + '\n';
        return out;
    }

private:
    LogHeader header_;
    std::vector<EventRecord> records_;
};

/// Incremental reader; stops at the first bad line with LogCorrupt.
class LogReader {
public:
    explicit LogReader(std::istream& in) : in_(in) {
        std::string line;
        if (!read_line(line)) throw LogCorrupt(1, 0, "missing header");
        try {
            const auto j = json::parse(line);
            header_.schema = j.at("schema").get<int>();
            header_.config = j.at("config");
            header_.config_hash = j.at("config_hash").get<std::string>();
        } catch (const json::exception& e) {
            throw LogCorrupt(line_no_, line_start_, std::string("bad header: ") + e.what());
        }
        if (header_.schema != kSchemaVersion)
            throw LogCorrupt(line_no_, line_start_, "unsupported schema " + std::to_string(header_.schema));
        if (hex64(fnv1a64(header_.config.dump())) != header_.config_hash)
            throw LogCorrupt(line_no_, line_start_, "config hash mismatch");
    }

    const LogHeader& header() const noexcept { return header_; }

    std::optional<EventRecord> next() {
        std::string line;
        if (!read_line(line)) return std::nullopt;
        EventRecord r;
        try {
            const auto j = json::parse(line);
            r.wall_t = j.at("wall_t").get<TimeMs>();
            r.seq = j.at("seq").get<std::uint64_t>();
            r.kind = j.at("kind").get<std::string>();
            r.payload = j.at("payload");
        } catch (const json::exception& e) {
            throw LogCorrupt(line_no_, line_start_, e.what());
        }
        if (have_last_ && (r.wall_t < last_t_ || r.seq <= last_seq_))
            throw LogCorrupt(line_no_, line_start_, "records out of order");
        have_last_ = true;
        last_t_ = r.wall_t;
        last_seq_ = r.seq;
        return r;
    }

    std::size_t line() const noexcept { return line_no_; }
    std::size_t line_offset() const noexcept { return line_start_; }

private:
    bool read_line(std::string& line) {
        line_start_ = offset_;
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        const bool terminated = !in_.eof();
        offset_ += line.size() + (terminated ? 1 : 0);
        if (!terminated) throw LogCorrupt(line_no_, line_start_, "truncated record (no newline)");
        return true;
    }

    std::istream& in_;
    LogHeader header_;
    std::size_t line_no_ = 0;
    std::size_t offset_ = 0;
    std::size_t line_start_ = 0;
    bool have_last_ = false;
    TimeMs last_t_ = 0;
    std::uint64_t last_seq_ = 0;
};

inline EventLog read_log(std::istream& in) {
    LogReader reader(in);
    EventLog log(reader.header());
    while (auto r = reader.next()) log.append(std::move(*r));
    return log;
}

inline EventLog parse_log(const std::string& text) {
    std::istringstream in(text);
    return read_log(in);
}

enum class FsyncPolicy { never, every_record, on_close };

/// Durable NDJSON writer. Doubles as the relay's event sink.
class LogWriter : public relay::EventSink {
public:
    LogWriter(const std::string& path, const LogHeader& header, FsyncPolicy policy = FsyncPolicy::on_close)
        : policy_(policy) {
        file_ = std::fopen(path.c_str(), "wb");
        if (!file_) throw Error("cannot open log file " + path);
        write_line(serialize(header));
    }

    LogWriter(const LogWriter&) = delete;
    LogWriter& operator=(const LogWriter&) = delete;

    ~LogWriter() override { close(); }

    /// Rejects records that go back in time.
    void append(TimeMs wall_t, std::string kind, json payload) {
        if (seq_ > 0 && wall_t < last_t_)
            throw OrderingViolation("event at " + std::to_string(wall_t) + " ms precedes " +
                                    std::to_string(last_t_) + " ms");
        if (!file_) throw Error("log already closed");
        write_line(serialize(EventRecord{wall_t, seq_, std::move(kind), std::move(payload)}));
        last_t_ = wall_t;
        ++seq_;
        if (policy_ == FsyncPolicy::every_record) sync();
    }

    void record(TimeMs wall_t, const json& event) override {
        append(wall_t, event.value("kind", "unknown"), event);
    }

    void close() {
        if (!file_) return;
        std::fflush(file_);
        if (policy_ != FsyncPolicy::never) ::fsync(fileno(file_));
        std::fclose(file_);
        file_ = nullptr;
    }

    std::uint64_t records_written() const noexcept { return seq_; }

private:
    void write_line(const std::string& s) {
        if (std::fwrite(s.data(), 1, s.size(), file_) != s.size() || std::fputc('\n', file_) == EOF)
            throw Error("log write failed");
    }

    void sync() {
        std::fflush(file_);
        ::fsync(fileno(file_));
    }

    FsyncPolicy policy_;
    std::FILE* file_ = nullptr;
    std::uint64_t seq_ = 0;
    TimeMs last_t_ = 0;
};

/// Collects events in memory; used by the simulator and tests.
class MemorySink : public relay::EventSink {
public:
    explicit MemorySink(LogHeader header) : log_(std::move(header)) {}
    void record(TimeMs wall_t, const json& event) override {
        log_.append({wall_t, 0, event.value("kind", "unknown"), event});
    }
    const EventLog& log() const noexcept { return log_; }

private:
    EventLog log_;
};

} // namespace eyeline::record

#endif // EYELINE_RECORD_EVENT_LOG_HPP
