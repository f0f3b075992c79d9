#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hod {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

// ---------------------------------------------------------------- errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

struct ValidationError : Error {
    using Error::Error;
};

struct IoError : Error {
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path(path) {}
    std::string path;
};

struct CorruptionError : Error {
    using Error::Error;
};

struct UnknownNode : Error {
    explicit UnknownNode(std::uint64_t id) : Error("unknown node id " + std::to_string(id)), id(id) {}
    std::uint64_t id;
};

struct CoreTooLarge : Error {
    CoreTooLarge(std::uint64_t achieved, std::uint64_t budget)
        : Error("core graph of " + std::to_string(achieved) + " bytes exceeds memory budget of " +
                std::to_string(budget) + " bytes"),
          achieved_bytes(achieved), budget_bytes(budget) {}
    std::uint64_t achieved_bytes;
    std::uint64_t budget_bytes;
};

// A scan cursor was asked to move against its direction.
struct ScanOrderError : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

// Broken internal contract (e.g. unsorted input to a single-pass filter).
struct InternalError : Error {
    using Error::Error;
};

struct OverflowError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------- distance

/// Non-negative path length with an explicit unreachable value that behaves
/// as +infinity. Finite additions that would wrap (or land on the sentinel)
/// throw OverflowError.
class Distance {
public:
    using value_type = std::uint64_t;

    constexpr Distance() = default;
    constexpr explicit Distance(value_type v) : v_(v) {}

    static constexpr Distance unreachable() { return Distance{kInf}; }
    static constexpr Distance zero() { return Distance{0}; }

    constexpr bool finite() const { return v_ != kInf; }
    constexpr value_type value() const { return v_; }

    friend constexpr auto operator<=>(Distance, Distance) = default;

    friend Distance operator+(Distance a, Distance b) {
        if (!a.finite() || !b.finite())
            return unreachable();
        if (a.v_ >= kInf - b.v_)
            throw OverflowError("distance overflow: " + std::to_string(a.v_) + " + " + std::to_string(b.v_));
        return Distance{a.v_ + b.v_};
    }

    friend std::ostream& operator<<(std::ostream& os, Distance d) {
        if (d.finite())
            return os << d.v_;
        return os << "INF";
    }

private:
    static constexpr value_type kInf = std::numeric_limits<value_type>::max();
    value_type v_ = kInf;
};

inline Distance operator+(Distance a, std::uint64_t len) { return a + Distance{len}; }

// ---------------------------------------------------------------- triplets

enum class Sign : std::uint8_t { outgoing = 0, incoming = 1 };

// Declaration order is also the final comparator tie-break order.
enum class EdgeKind : std::uint8_t { original = 0, baseline = 1, candidate = 2 };

/// One directed edge seen from node `a`. With Sign::outgoing the edge is
/// <a,b>; with Sign::incoming it is <b,a>. Every logical edge is stored twice,
/// once per sign.
struct EdgeTriplet {
    NodeId a = kNoNode;
    NodeId b = kNoNode;
    std::uint64_t length = 0;
    Sign sign = Sign::outgoing;
    EdgeKind kind = EdgeKind::original;
    NodeId pred_hint = kNoNode;

    friend bool operator==(const EdgeTriplet&, const EdgeTriplet&) = default;

    EdgeTriplet mirrored() const {
        EdgeTriplet t = *this;
        t.a = b;
        t.b = a;
        t.sign = sign == Sign::outgoing ? Sign::incoming : Sign::outgoing;
        return t;
    }
    NodeId tail() const { return sign == Sign::outgoing ? a : b; }
    NodeId head() const { return sign == Sign::outgoing ? b : a; }
};

std::ostream& operator<<(std::ostream& os, const EdgeTriplet& t);
const char* to_string(EdgeKind k);

}  // namespace hod
