#ifndef EYELINE_CORE_HPP
#define EYELINE_CORE_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace eyeline {

/// Milliseconds. Used for sample timestamps, durations and session clocks.
using TimeMs = std::int64_t;

/// Opaque per-session participant token assigned by the relay.
class ClientId {
public:
    ClientId() = default;
    explicit ClientId(std::string value) : value_(std::move(value)) {}

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend bool operator==(const ClientId&, const ClientId&) = default;
    friend auto operator<=>(const ClientId&, const ClientId&) = default;

private:
    std::string value_;
};

using OptClient = std::optional<ClientId>;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned rectangle, top-left origin, half-open on the far edges.
struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double right() const noexcept { return x + w; }
    double bottom() const noexcept { return y + h; }
    Point center() const noexcept { return {x + w / 2.0, y + h / 2.0}; }

    bool contains(Point p) const noexcept {
        return p.x >= x && p.x < right() && p.y >= y && p.y < bottom();
    }

    bool intersects(const Rect& o) const noexcept {
        return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Who looks at whom (or at no one) as of `t`. Self-gaze is never stored;
/// it is normalized to an absent target.
struct GazeEdge {
    ClientId source;
    OptClient target;
    TimeMs t = 0;

    friend bool operator==(const GazeEdge&, const GazeEdge&) = default;
};

// Error types. Operations that reject input throw one of these; the caller's
// state values are never touched on the throwing path.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OrderingViolation : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class LayoutInfeasible : public Error {
public:
    using Error::Error;
};

} // namespace eyeline

template <>
struct std::hash<eyeline::ClientId> {
    std::size_t operator()(const eyeline::ClientId& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};

#endif // EYELINE_CORE_HPP
