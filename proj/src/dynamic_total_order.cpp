#include "idbft/dynamic_total_order.hpp"

#include <algorithm>

namespace idbft {

std::optional<JoinResult> dto_join(
    const std::vector<std::pair<std::int64_t, NodeId>>& acks) {
    std::map<std::int64_t, int> tally;
    for (const auto& [round, from] : acks) ++tally[round];
    std::optional<std::int64_t> majority;
    for (const auto& [round, count] : tally) {
        if (2 * count > static_cast<int>(acks.size())) majority = round;
    }
    if (!majority) return std::nullopt;
    JoinResult res;
    res.round = *majority + 1;
    for (const auto& [round, from] : acks) res.members.insert(from);
    return res;
}

DynamicOrderNode DynamicOrderNode::founder(NodeId self, std::set<NodeId> genesis,
                                           int start_round) {
    DynamicOrderNode n(self, Phase::Looping);
    n.members_ = std::move(genesis);
    n.round_ = start_round - 1;
    n.first_run_ = start_round;
    n.final_upto_ = start_round - 1;
    return n;
}

DynamicOrderNode DynamicOrderNode::joiner(NodeId self, int join_round) {
    DynamicOrderNode n(self, Phase::WaitingToJoin);
    n.join_round_ = join_round;
    return n;
}

DynamicOrderNode::StepOut DynamicOrderNode::step(int global_round,
                                                 const RoundInbox& inbox,
                                                 std::optional<Value> own_event) {
    StepOut out;
    if (halted_) return out;

    if (phase_ == Phase::WaitingToJoin) {
        if (global_round == join_round_) {
            out.broadcasts.push_back(Payload::present());
            phase_ = Phase::WaitingForAcks;
        }
        return out;
    }
    if (phase_ == Phase::WaitingForAcks) {
        if (global_round != join_round_ + 2) return out;  // acks are in flight
        std::vector<std::pair<std::int64_t, NodeId>> acks;
        inbox.for_each([&](NodeId sender, const Payload& p) {
            if (p.kind == MsgKind::Ack) acks.emplace_back(p.round_tag, sender);
        });
        auto joined = dto_join(acks);
        if (!joined) {
            join_failed_ = true;
            halted_ = true;
            return out;
        }
        round_ = joined->round;
        members_ = joined->members;
        first_run_ = round_ + 1;
        final_upto_ = round_;
        phase_ = Phase::Looping;
        return out;  // the loop starts next round
    }

    ++round_;

    // Membership and ack replies. A draining node no longer maintains S.
    if (!draining_) {
        inbox.for_each([&](NodeId sender, const Payload& p) {
            if (p.kind == MsgKind::Present) {
                members_.insert(sender);
                out.directs.emplace_back(
                    sender, Payload::ack(static_cast<std::int32_t>(round_)));
            } else if (p.kind == MsgKind::Absent) {
                members_.erase(sender);
            }
        });
    }

    // Events witnessed last round; one pair per submitter (smallest body when
    // a Byzantine node sent several).
    std::map<NodeId, Value> collected;
    if (!draining_) {
        inbox.for_each([&](NodeId sender, const Payload& p) {
            if (p.kind == MsgKind::Event && p.round_tag == round_ - 1) {
                auto it = collected.find(sender);
                if (it == collected.end() || p.value < it->second) {
                    collected[sender] = p.value;
                }
            }
        });
    }

    if (leave_requested_ && !draining_) {
        draining_ = true;
        out.broadcasts.push_back(Payload::absent());
    }

    if (!draining_) {
        if (own_event && !own_event->is_bottom()) {
            out.broadcasts.push_back(
                Payload::event(*own_event, static_cast<std::int32_t>(round_)));
        }
        // Start this round's parallel consensus run against the current S.
        std::vector<std::pair<std::uint64_t, Value>> inputs;
        for (const auto& [submitter, body] : collected) {
            inputs.emplace_back(submitter.value, body);
        }
        auto [it, inserted] = runs_.try_emplace(
            round_, ParallelConsensus(self_, inputs,
                                      static_cast<std::uint64_t>(round_)));
        snapshots_[round_] = members_;
        auto init_out = it->second.init();
        out.broadcasts.insert(out.broadcasts.end(), init_out.begin(), init_out.end());
    }

    // Advance outstanding runs with their namespaced, snapshot-filtered slices.
    for (auto it = runs_.begin(); it != runs_.end();) {
        std::int64_t q = it->first;
        ParallelConsensus& run = it->second;
        if (q != round_) {  // the freshly started run only did its init round
            const std::set<NodeId>& snap = snapshots_[q];
            RoundInbox view = inbox.filtered([&](NodeId sender, const Payload& p) {
                return p.instance && p.instance->run == static_cast<std::uint64_t>(q) &&
                       snap.count(sender) > 0;
            });
            auto step_out = run.step(view);
            out.broadcasts.insert(out.broadcasts.end(), step_out.outbox.begin(),
                                  step_out.outbox.end());
            for (const PcTermination& t : step_out.terminations) {
                termination_log_[q][t.key] = static_cast<int>(round_);
                if (t.output) results_[q][t.key] = *t.output;
            }
        }
        if (run.resolved()) {
            it = runs_.erase(it);
        } else {
            ++it;
        }
    }

    // Finality frontier and chain assembly.
    while (true) {
        std::int64_t next = final_upto_ + 1;
        if (next >= round_) break;
        auto snap = snapshots_.find(next);
        if (snap == snapshots_.end()) break;  // run not started by this node
        if (!dto_round_final(round_, next, static_cast<std::int64_t>(snap->second.size()))) {
            break;
        }
        final_upto_ = next;
        auto res = results_.find(next);
        if (res != results_.end()) {
            for (const auto& [key, value] : res->second) {
                ChainEntry e{next, NodeId{key}, value};
                chain_.push_back(e);
                out.chain_delta.push_back(e);
            }
        }
    }

    if (draining_ && runs_.empty()) halted_ = true;
    return out;
}

}  // namespace idbft
