#include "idbft/consensus.hpp"

#include "idbft/thresholds.hpp"

namespace idbft {

RoundInbox substitute_missing(const std::set<NodeId>& silent,
                              const std::optional<Payload>& last_sent,
                              const RoundInbox& inbox) {
    RoundInbox out = inbox;
    if (!last_sent) return out;
    for (NodeId m : silent) {
        if (!inbox.contains_sender(m)) out.add(m, *last_sent);
    }
    return out;
}

std::optional<Value> best_quorum_value(const std::map<Value, int>& counts,
                                       std::int64_t n_v,
                                       bool (*threshold)(std::int64_t, std::int64_t)) {
    std::optional<Value> best;
    int best_count = -1;
    for (const auto& [value, count] : counts) {
        if (n_v < 1 || !threshold(count, n_v)) continue;
        if (count > best_count) {  // map order makes this smallest-value on ties
            best = value;
            best_count = count;
        }
    }
    return best;
}

EarlyConsensus::EarlyConsensus(NodeId self, Value input)
    : self_(self), opinion_(input), rotor_(self) {
    if (input.is_bottom()) throw ProtocolError("consensus: bottom is not a valid input");
}

int EarlyConsensus::phase() const {
    if (round_ <= 2) return 0;
    return (round_ - 3) / 5 + 1;
}

EarlyConsensus::Subround EarlyConsensus::subround() const {
    if (round_ <= 0) return Subround::Init1;
    if (round_ == 1) return Subround::Init1;
    if (round_ == 2) return Subround::Init2;
    return static_cast<Subround>((round_ - 3) % 5 + 1);
}

const std::set<NodeId>& EarlyConsensus::members() const {
    if (!frozen_) throw ProtocolError("consensus: registry not frozen yet");
    return frozen_->members();
}

std::vector<Payload> EarlyConsensus::init() {
    if (round_ != 0) throw ProtocolError("consensus: init called twice");
    round_ = 1;
    return rotor_.init();
}

void EarlyConsensus::buffer_rotor_traffic(const RoundInbox& inbox) {
    rotor_buffer_.merge(inbox.filtered([](NodeId, const Payload& p) {
        return !p.instance && (p.kind == MsgKind::Init || p.kind == MsgKind::Echo ||
                               p.kind == MsgKind::Opinion);
    }));
}

EarlyConsensus::Step EarlyConsensus::step(const RoundInbox& inbox) {
    if (round_ < 1) throw ProtocolError("consensus: step before init");
    if (terminated_) throw ProtocolError("consensus: step after termination");
    ++round_;

    Step out;

    if (round_ == 2) {
        // Freeze n_v to the senders heard during initialization, then run the
        // rotor's echo phase on the same inbox.
        frozen_ = SenderRegistry::frozen_from(inbox.senders());
        auto rotor_step = rotor_.step(inbox, std::nullopt);
        out.outbox = std::move(rotor_step.outbox);
        return out;
    }

    RoundInbox filtered = frozen_->filter(inbox);
    buffer_rotor_traffic(filtered);
    std::int64_t n = frozen_->n_v();

    // A sender silent for the whole phase is either terminated or withholding;
    // only those are covered by the substitution rule.
    if (subround() == Subround::R1) {
        heard_this_phase_.clear();
    }
    for (NodeId sender : filtered.senders()) heard_this_phase_.insert(sender);
    std::set<NodeId> silent;
    for (NodeId m : frozen_->members()) {
        if (!heard_this_phase_.count(m)) silent.insert(m);
    }

    switch (subround()) {
        case Subround::R1: {
            Payload msg = Payload::input(opinion_);
            out.outbox.push_back(msg);
            last_sent_ = msg;
            break;
        }
        case Subround::R2: {
            RoundInbox view = substitute_missing(silent, last_sent_, filtered);
            auto counts = view.value_counts(MsgKind::Input);
            out.observations.push_back({round_, MsgKind::Input, counts, n});
            last_sent_.reset();
            if (auto x = best_quorum_value(counts, n, ge_two_thirds)) {
                Payload msg = Payload::prefer(*x);
                out.outbox.push_back(msg);
                last_sent_ = msg;
            }
            break;
        }
        case Subround::R3: {
            RoundInbox view = substitute_missing(silent, last_sent_, filtered);
            auto counts = view.value_counts(MsgKind::Prefer);
            out.observations.push_back({round_, MsgKind::Prefer, counts, n});
            last_sent_.reset();
            if (auto x = best_quorum_value(counts, n, ge_one_third)) {
                opinion_ = *x;
            }
            if (auto x = best_quorum_value(counts, n, ge_two_thirds)) {
                Payload msg = Payload::strong_prefer(*x);
                out.outbox.push_back(msg);
                last_sent_ = msg;
            }
            break;
        }
        case Subround::R4: {
            RoundInbox view = substitute_missing(silent, last_sent_, filtered);
            buffered_sp_counts_ = view.value_counts(MsgKind::StrongPrefer);
            sp_delivery_round_ = round_;
            out.observations.push_back(
                {round_, MsgKind::StrongPrefer, buffered_sp_counts_, n});
            last_sent_.reset();
            phase_coordinator_.reset();
            if (!rotor_.terminated()) {
                auto rotor_step = rotor_.step(rotor_buffer_, opinion_);
                rotor_buffer_ = RoundInbox{};
                out.outbox = std::move(rotor_step.outbox);
                out.coordinator = rotor_step.selected;
                phase_coordinator_ = rotor_step.selected;
            }
            break;
        }
        case Subround::R5: {
            std::optional<Value> c;
            if (phase_coordinator_) {
                if (const auto* list = filtered.from(*phase_coordinator_)) {
                    for (const Payload& p : *list) {
                        if (p.kind == MsgKind::Opinion && !p.instance) {
                            if (!c || p.value < *c) c = p.value;
                        }
                    }
                }
            }
            bool any_one_third =
                best_quorum_value(buffered_sp_counts_, n, ge_one_third).has_value();
            if (!any_one_third && c) {
                opinion_ = *c;
            }
            if (auto x = best_quorum_value(buffered_sp_counts_, n, ge_two_thirds)) {
                terminated_ = true;
                output_ = *x;
                out.terminated_now = true;
            }
            last_sent_.reset();
            break;
        }
        default:
            throw ProtocolError("consensus: bad subround");
    }
    return out;
}

}  // namespace idbft
