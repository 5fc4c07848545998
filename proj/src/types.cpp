#include "idbft/types.hpp"

#include <numeric>

namespace idbft {

namespace {

using Wide = __int128;

std::int64_t narrow(Wide x) {
    if (x > Wide(INT64_MAX) || x < Wide(INT64_MIN)) {
        throw std::overflow_error("rational value out of range");
    }
    return static_cast<std::int64_t>(x);
}

}  // namespace

Value Value::ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Value(num, den);
}

std::int64_t Value::as_int() const {
    if (den_ != 1) throw std::logic_error("value is not an integer");
    return num_;
}

Value Value::midpoint(const Value& other) const {
    if (is_bottom() || other.is_bottom()) {
        throw std::logic_error("midpoint of bottom");
    }
    // (a/b + c/d) / 2 = (ad + cb) / 2bd
    Wide num = Wide(num_) * other.den_ + Wide(other.num_) * den_;
    Wide den = Wide(2) * den_ * other.den_;
    Wide g = std::gcd(static_cast<long long>(num < 0 ? -num : num),
                      static_cast<long long>(den));
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Value(narrow(num), narrow(den));
}

Value Value::minus(const Value& other) const {
    if (is_bottom() || other.is_bottom()) {
        throw std::logic_error("difference of bottom");
    }
    Wide num = Wide(num_) * other.den_ - Wide(other.num_) * den_;
    Wide den = Wide(den_) * other.den_;
    Wide g = std::gcd(static_cast<long long>(num < 0 ? -num : num),
                      static_cast<long long>(den));
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Value(narrow(num), narrow(den));
}

std::strong_ordering Value::operator<=>(const Value& rhs) const {
    if (is_bottom() || rhs.is_bottom()) {
        // bottom sorts below every application value
        return (den_ != 0) <=> (rhs.den_ != 0);
    }
    Wide lhs_w = Wide(num_) * rhs.den_;
    Wide rhs_w = Wide(rhs.num_) * den_;
    return lhs_w <=> rhs_w;
}

std::string to_string(const Value& v) {
    if (v.is_bottom()) return "_";
    if (v.den() == 1) return std::to_string(v.num());
    return std::to_string(v.num()) + "/" + std::to_string(v.den());
}

const char* to_string(MsgKind k) {
    switch (k) {
        case MsgKind::Present: return "present";
        case MsgKind::Body: return "body";
        case MsgKind::Init: return "init";
        case MsgKind::Echo: return "echo";
        case MsgKind::Opinion: return "opinion";
        case MsgKind::Input: return "input";
        case MsgKind::Prefer: return "prefer";
        case MsgKind::StrongPrefer: return "strongprefer";
        case MsgKind::NoPreference: return "nopreference";
        case MsgKind::NoStrongPreference: return "nostrongpreference";
        case MsgKind::Ack: return "ack";
        case MsgKind::Absent: return "absent";
        case MsgKind::Event: return "event";
    }
    return "?";
}

std::string to_string(const Payload& p) {
    std::string s;
    if (p.instance) s += to_string(*p.instance) + ":";
    s += to_string(p.kind);
    switch (p.kind) {
        case MsgKind::Body:
        case MsgKind::Echo:
            s += "(" + to_string(p.origin) + "," + to_string(p.value) + ")";
            break;
        case MsgKind::Opinion:
        case MsgKind::Input:
        case MsgKind::Prefer:
        case MsgKind::StrongPrefer:
            s += "(" + to_string(p.value) + ")";
            break;
        case MsgKind::Ack:
            s += "(" + std::to_string(p.round_tag) + ")";
            break;
        case MsgKind::Event:
            s += "(" + to_string(p.value) + ",@" + std::to_string(p.round_tag) + ")";
            break;
        default:
            break;
    }
    return s;
}

}  // namespace idbft
