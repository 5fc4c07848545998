#include "idbft/rotor.hpp"

#include <algorithm>

#include "idbft/thresholds.hpp"

namespace idbft {

std::vector<Payload> RotorCoordinator::init() {
    if (stage_ != 0) throw ProtocolError("rotor: init called twice");
    stage_ = 1;
    return {Payload::init()};
}

bool RotorCoordinator::in_candidates(NodeId p) const {
    return std::binary_search(candidates_.begin(), candidates_.end(), p);
}

void RotorCoordinator::insert_candidate(NodeId p) {
    candidates_.insert(std::lower_bound(candidates_.begin(), candidates_.end(), p), p);
}

RotorCoordinator::Step RotorCoordinator::step(const RoundInbox& inbox,
                                              std::optional<Value> own_opinion) {
    if (stage_ == 0) throw ProtocolError("rotor: step before init");
    if (terminated_) throw ProtocolError("rotor: step after termination");

    Step out;
    registry_.absorb(inbox);

    if (stage_ == 1) {
        // Round 2: echo every init received.
        stage_ = 2;
        for (NodeId p : inbox.senders_of(
                 [](const Payload& p) { return p.kind == MsgKind::Init && !p.instance; })) {
            out.outbox.push_back(Payload::echo_id(p));
        }
        return out;
    }

    // Loop iteration r = iteration_.
    std::vector<Payload> pending;  // B_v

    // Per-round echo counts per echoed id.
    std::map<NodeId, int> echo_counts;
    inbox.for_each([&](NodeId, const Payload& p) {
        if (p.kind == MsgKind::Echo && !p.instance && p.value.is_bottom()) {
            ++echo_counts[p.origin];
        }
    });

    std::int64_t n = registry_.n_v();
    for (const auto& [p, count] : echo_counts) {
        if (n >= 1 && ge_one_third(count, n) && !in_candidates(p)) {
            pending.push_back(Payload::echo_id(p));
        }
        if (n >= 1 && ge_two_thirds(count, n) && !in_candidates(p)) {
            insert_candidate(p);
            insertion_log_.emplace_back(iteration_, p);
        }
    }

    if (candidates_.empty()) {
        throw ProtocolError("rotor: no candidate coordinators at selection");
    }
    NodeId coordinator =
        candidates_[static_cast<std::size_t>(iteration_) % candidates_.size()];
    out.selected = coordinator;
    selections_.push_back(coordinator);
    if (iteration_ == 0) candidates_at_first_selection_ = candidates_;

    // Accept the opinion delivered this round by the previous coordinator.
    // A Byzantine coordinator may deliver several; take the smallest value.
    if (prev_coordinator_) {
        std::optional<Value> accepted;
        if (const auto* list = inbox.from(*prev_coordinator_)) {
            for (const Payload& p : *list) {
                if (p.kind == MsgKind::Opinion && !p.instance) {
                    if (!accepted || p.value < *accepted) accepted = p.value;
                }
            }
        }
        if (accepted) {
            out.events.push_back(RotorEvent{RotorEvent::Kind::OpinionAccepted,
                                            *prev_coordinator_, *accepted, iteration_});
        }
    }

    // A candidate inserted below the cursor shifts the consumed prefix, so a
    // reselection alone does not prove the rotation wrapped. Terminate only
    // once every candidate has been selected and either the repeat or a full
    // lap of the rotation confirms it; anything earlier is a wasted iteration.
    bool repeat = std::find(selected_set_.begin(), selected_set_.end(), coordinator) !=
                  selected_set_.end();
    if (!repeat) selected_set_.push_back(coordinator);
    bool exhausted = selected_set_.size() >= candidates_.size();
    if (exhausted &&
        (repeat || iteration_ >= static_cast<int>(candidates_.size()))) {
        terminated_ = true;
        out.events.push_back(
            RotorEvent{RotorEvent::Kind::Terminated, {}, {}, iteration_});
        ++iteration_;
        return out;  // B_v is dropped with the break
    }

    if (coordinator == self_ && own_opinion) {
        pending.push_back(Payload::opinion(*own_opinion));
    }

    prev_coordinator_ = coordinator;
    ++iteration_;
    out.outbox = std::move(pending);
    return out;
}

}  // namespace idbft
