#include "idbft/reliable_broadcast.hpp"

#include "idbft/thresholds.hpp"

namespace idbft {

RbBroadcaster::RbBroadcaster(NodeId self, NodeId sender,
                             std::optional<Value> body_if_sender)
    : self_(self), sender_(sender), own_body_(body_if_sender) {
    if (own_body_.has_value() != (self == sender)) {
        throw ProtocolError("rb: body must be supplied by the sender and only the sender");
    }
    if (own_body_ && own_body_->is_bottom()) {
        throw ProtocolError("rb: bottom is not a broadcastable body");
    }
}

std::vector<Payload> RbBroadcaster::init() {
    if (round_ != 0) throw ProtocolError("rb: init called twice");
    round_ = 1;
    if (self_ == sender_) return {Payload::body(sender_, *own_body_)};
    return {Payload::present()};
}

RbBroadcaster::Step RbBroadcaster::step(const RoundInbox& inbox) {
    if (round_ < 1) throw ProtocolError("rb: step before init");
    ++round_;

    registry_.absorb(inbox);

    // Track every body attributed to s, whether it arrived as a direct
    // (m,s) message or inside an echo.
    inbox.for_each([this](NodeId, const Payload& p) {
        if ((p.kind == MsgKind::Body || p.kind == MsgKind::Echo) &&
            p.origin == sender_ && !p.instance && !p.value.is_bottom()) {
            bodies_.try_emplace(p.value);
        }
    });

    Step out;
    if (round_ == 2) {
        // Echo any (m,s) received directly from s.
        for (auto& [body, st] : bodies_) {
            if (const auto* list = inbox.from(sender_)) {
                Payload direct = Payload::body(sender_, body);
                for (const Payload& p : *list) {
                    if (p == direct) {
                        out.outbox.push_back(Payload::echo_body(sender_, body));
                        break;
                    }
                }
            }
        }
        return out;
    }

    // Rounds 3 and up. Echo counts are per round; the echo decision is
    // evaluated before the accept decision so a node echoes in its own
    // acceptance round.
    std::int64_t n = registry_.n_v();
    if (n < 1) return out;
    for (auto& [body, st] : bodies_) {
        int count = inbox.count_exact(Payload::echo_body(sender_, body));
        if (!st.accepted && ge_one_third(count, n)) {
            out.outbox.push_back(Payload::echo_body(sender_, body));
        }
        if (!st.accepted && ge_two_thirds(count, n)) {
            st.accepted = true;
            st.accepted_round = round_;
            out.events.push_back(RbEvent{body, sender_, round_});
        }
    }
    return out;
}

bool RbBroadcaster::accepted(const Value& body) const {
    auto it = bodies_.find(body);
    return it != bodies_.end() && it->second.accepted;
}

std::optional<int> RbBroadcaster::accepted_round(const Value& body) const {
    auto it = bodies_.find(body);
    if (it == bodies_.end() || !it->second.accepted) return std::nullopt;
    return it->second.accepted_round;
}

std::vector<Value> RbBroadcaster::bodies_seen() const {
    std::vector<Value> out;
    for (const auto& [body, st] : bodies_) out.push_back(body);
    return out;
}

}  // namespace idbft
