// Shared vocabulary for the id-only protocols: node identifiers, exact
// rational values with a distinguished bottom, and the wire payloads.

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace idbft {

// Unique, totally ordered, not necessarily consecutive.
struct NodeId {
    std::uint64_t value = 0;
    auto operator<=>(const NodeId&) const = default;
};

inline std::string to_string(NodeId id) { return std::to_string(id.value); }

// Totally ordered scalar. Exact rational (protocols other than approximate
// agreement only ever produce integers). The distinguished bottom compares
// less than every application value and is marked by den == 0.
class Value {
public:
    constexpr Value() = default;  // bottom

    static Value of(std::int64_t n) { return Value(n, 1); }
    static Value ratio(std::int64_t num, std::int64_t den);
    static constexpr Value bottom() { return Value(); }

    bool is_bottom() const { return den_ == 0; }
    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    // Integer view; only valid for den == 1 values.
    std::int64_t as_int() const;

    Value midpoint(const Value& other) const;  // (a+b)/2, exact
    Value minus(const Value& other) const;     // a-b, exact

    std::strong_ordering operator<=>(const Value& rhs) const;
    bool operator==(const Value& rhs) const {
        return num_ == rhs.num_ && den_ == rhs.den_;
    }

private:
    constexpr Value(std::int64_t n, std::int64_t d) : num_(n), den_(d) {}
    std::int64_t num_ = 0;
    std::int64_t den_ = 0;
};

std::string to_string(const Value& v);

// Namespacing tag for parallel-consensus messages (the "id:" prefix). In the
// dynamic total order, `run` is the starting round of the parallel consensus
// run and `key` is the submitter identifier of the individual pair.
struct InstanceId {
    std::uint64_t run = 0;
    std::uint64_t key = 0;
    auto operator<=>(const InstanceId&) const = default;
};

inline std::string to_string(InstanceId id) {
    return std::to_string(id.run) + "." + std::to_string(id.key);
}

enum class MsgKind : std::uint8_t {
    Present,
    Body,   // the (m,s) message of reliable broadcast; origin = s, value = m
    Init,
    Echo,   // origin = echoed id; value = echoed body (bottom for id-only echoes)
    Opinion,
    Input,
    Prefer,
    StrongPrefer,
    NoPreference,
    NoStrongPreference,
    Ack,    // round_tag = acknowledged round
    Absent,
    Event,  // value = event body, round_tag = round stamp
};

const char* to_string(MsgKind k);

struct Payload {
    MsgKind kind = MsgKind::Present;
    NodeId origin{};
    Value value{};
    std::int32_t round_tag = 0;
    std::optional<InstanceId> instance{};

    auto operator<=>(const Payload&) const = default;

    Payload tagged(InstanceId id) const {
        Payload p = *this;
        p.instance = id;
        return p;
    }

    static Payload present() { return {MsgKind::Present}; }
    static Payload body(NodeId s, Value m) { return {MsgKind::Body, s, m}; }
    static Payload init() { return {MsgKind::Init}; }
    static Payload echo_body(NodeId s, Value m) { return {MsgKind::Echo, s, m}; }
    static Payload echo_id(NodeId p) { return {MsgKind::Echo, p}; }
    static Payload opinion(Value v) { return {MsgKind::Opinion, {}, v}; }
    static Payload input(Value v) { return {MsgKind::Input, {}, v}; }
    static Payload prefer(Value v) { return {MsgKind::Prefer, {}, v}; }
    static Payload strong_prefer(Value v) { return {MsgKind::StrongPrefer, {}, v}; }
    static Payload no_preference() { return {MsgKind::NoPreference}; }
    static Payload no_strong_preference() { return {MsgKind::NoStrongPreference}; }
    static Payload ack(std::int32_t round) { return {MsgKind::Ack, {}, {}, round}; }
    static Payload absent() { return {MsgKind::Absent}; }
    static Payload event(Value body, std::int32_t round) {
        return {MsgKind::Event, {}, body, round};
    }
};

std::string to_string(const Payload& p);

// Sent in round_sent, delivered exactly one round later. The engine stamps
// the true sender; protocol code may rely on that and nothing more.
struct Envelope {
    NodeId sender{};
    std::int32_t round_sent = 0;
    Payload payload{};
};

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace idbft
