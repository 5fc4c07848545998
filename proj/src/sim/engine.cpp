#include "idbft/sim/engine.hpp"

#include <algorithm>

#include "idbft/approx_agreement.hpp"
#include "idbft/consensus.hpp"
#include "idbft/dynamic_total_order.hpp"
#include "idbft/parallel_consensus.hpp"
#include "idbft/reliable_broadcast.hpp"
#include "idbft/rotor.hpp"
#include "idbft/sim/adversary.hpp"

namespace idbft::sim {

namespace {

// Lockstep delivery fabric. Sends made during round r surface in the
// recipients' round r+1 inboxes, with per-round duplicate suppression.
class Bus {
public:
    Bus(GroundTruth& truth, bool log) : truth_(truth), log_(log) {}

    void send(int round, NodeId from, const Outgoing& o,
              const std::set<NodeId>& recipients) {
        if (o.to) {
            if (recipients.count(*o.to)) deliver(round + 1, from, *o.to, o.payload);
            return;
        }
        for (NodeId r : recipients) deliver(round + 1, from, r, o.payload);
    }

    RoundInbox take(NodeId node) {
        auto it = current_.find(node);
        if (it == current_.end()) return {};
        RoundInbox inbox = std::move(it->second);
        current_.erase(it);
        return inbox;
    }

    void advance() {
        current_ = std::move(next_);
        next_.clear();
    }

private:
    void deliver(int round, NodeId from, NodeId to, const Payload& p) {
        if (!next_[to].add(from, p)) return;  // duplicate within the round
        ++truth_.deliveries_count;
        if (log_) truth_.deliveries.push_back(Delivery{round, from, to, p});
    }

    GroundTruth& truth_;
    bool log_;
    std::map<NodeId, RoundInbox> current_;
    std::map<NodeId, RoundInbox> next_;
};

std::map<NodeId, std::vector<Outgoing>> run_adversary(
    Adversary& adversary, const Adversary::View& view, const std::set<NodeId>& byz) {
    auto sends = adversary.act(view);
    for (const auto& [from, list] : sends) {
        if (!byz.count(from)) {
            throw ProtocolError("adversary attempted to impersonate node " +
                                to_string(from));
        }
    }
    return sends;
}

std::vector<Outgoing> as_broadcasts(const std::vector<Payload>& payloads) {
    std::vector<Outgoing> out;
    out.reserve(payloads.size());
    for (const Payload& p : payloads) out.push_back(Outgoing{std::nullopt, p});
    return out;
}

// ---------------------------------------------------------------- reliable broadcast

RunResult run_rb(const Scenario& s) {
    RunResult result;
    GroundTruth& truth = result.truth;
    truth.correct = s.correct_ids();
    truth.faulty = s.faulty_ids();
    RbTruth rb;

    NodeId sender{};
    std::optional<Value> body;
    for (const auto& n : s.nodes) {
        if (n.input) {
            sender = n.id;
            body = n.input;
        }
    }
    rb.sender = sender;
    if (truth.correct.count(sender)) rb.designated_body = body;

    std::map<NodeId, RbBroadcaster> machines;
    std::set<NodeId> everyone;
    for (const auto& n : s.nodes) {
        everyone.insert(n.id);
        machines.emplace(n.id, RbBroadcaster(n.id, sender,
                                             n.id == sender ? body : std::nullopt));
    }

    Bus bus(truth, true);
    auto adversary = make_adversary(s);
    int horizon = s.horizon();
    int extensions = 0;

    for (int round = 1; round <= horizon; ++round) {
        bus.advance();
        std::map<NodeId, std::vector<Outgoing>> correct_out;
        std::map<NodeId, std::vector<Outgoing>> shadow_out;
        bool accepted_this_round = false;
        for (auto& [id, machine] : machines) {
            std::vector<Outgoing> outbox;
            if (round == 1) {
                outbox = as_broadcasts(machine.init());
            } else {
                auto step = machine.step(bus.take(id));
                outbox = as_broadcasts(step.outbox);
                if (truth.correct.count(id)) {
                    for (const RbEvent& e : step.events) {
                        rb.accept_round[id][e.body] = e.round;
                        accepted_this_round = true;
                    }
                }
            }
            (truth.correct.count(id) ? correct_out : shadow_out)[id] = std::move(outbox);
        }

        Adversary::View view;
        view.round = round;
        view.correct = &truth.correct;
        view.byzantine = &truth.faulty;
        view.correct_outboxes = &correct_out;
        view.shadow_outboxes = &shadow_out;
        auto byz_sends = run_adversary(*adversary, view, truth.faulty);

        for (const auto& [id, outbox] : correct_out) {
            for (const Outgoing& o : outbox) bus.send(round, id, o, everyone);
        }
        for (const auto& [id, outbox] : byz_sends) {
            for (const Outgoing& o : outbox) bus.send(round, id, o, everyone);
        }

        truth.rounds_executed = round;
        // Give the relay property its one extra round after a late acceptance.
        if (accepted_this_round && round == horizon && extensions < 4) {
            ++horizon;
            ++extensions;
        }
    }
    truth.detail = std::move(rb);
    result.verdict = verify_run(s, truth);
    return result;
}

// ---------------------------------------------------------------- rotor

RunResult run_rotor(const Scenario& s) {
    RunResult result;
    GroundTruth& truth = result.truth;
    truth.correct = s.correct_ids();
    truth.faulty = s.faulty_ids();
    RotorTruth rt;

    std::map<NodeId, RotorCoordinator> machines;
    std::map<NodeId, Value> opinions;
    std::set<NodeId> everyone;
    for (const auto& n : s.nodes) {
        everyone.insert(n.id);
        machines.emplace(n.id, RotorCoordinator(n.id));
        opinions[n.id] = n.input.value_or(Value::of(0));
    }
    rt.opinions = opinions;

    Bus bus(truth, true);
    auto adversary = make_adversary(s);
    int horizon = s.horizon();

    for (int round = 1; round <= horizon; ++round) {
        bus.advance();
        std::map<NodeId, std::vector<Outgoing>> correct_out;
        std::map<NodeId, std::vector<Outgoing>> shadow_out;
        for (auto& [id, machine] : machines) {
            std::vector<Outgoing> outbox;
            if (round == 1) {
                outbox = as_broadcasts(machine.init());
            } else if (!machine.terminated()) {
                auto step = machine.step(bus.take(id), opinions[id]);
                outbox = as_broadcasts(step.outbox);
                if (truth.correct.count(id)) {
                    for (const RotorEvent& e : step.events) {
                        rt.events[id].push_back(e);
                        if (e.kind == RotorEvent::Kind::Terminated) {
                            rt.termination_iteration[id] = e.iteration;
                        }
                    }
                }
            }
            (truth.correct.count(id) ? correct_out : shadow_out)[id] = std::move(outbox);
        }

        Adversary::View view;
        view.round = round;
        view.correct = &truth.correct;
        view.byzantine = &truth.faulty;
        view.correct_outboxes = &correct_out;
        view.shadow_outboxes = &shadow_out;
        auto byz_sends = run_adversary(*adversary, view, truth.faulty);

        for (const auto& [id, outbox] : correct_out) {
            for (const Outgoing& o : outbox) bus.send(round, id, o, everyone);
        }
        for (const auto& [id, outbox] : byz_sends) {
            for (const Outgoing& o : outbox) bus.send(round, id, o, everyone);
        }
        truth.rounds_executed = round;

        bool all_done = true;
        for (NodeId id : truth.correct) {
            if (!machines.at(id).terminated()) all_done = false;
        }
        if (all_done) break;
    }

    for (NodeId id : truth.correct) {
        const RotorCoordinator& m = machines.at(id);
        rt.selections[id] = m.selections();
        rt.insertions[id] = m.insertion_log();
        rt.first_selection_candidates[id] = m.candidates_at_first_selection();
    }
    truth.detail = std::move(rt);
    result.verdict = verify_run(s, truth);
    return result;
}

// ---------------------------------------------------------------- consensus

RunResult run_consensus(const Scenario& s) {
    RunResult result;
    GroundTruth& truth = result.truth;
    truth.correct = s.correct_ids();
    truth.faulty = s.faulty_ids();
    ConsensusTruth ct;

    std::map<NodeId, EarlyConsensus> machines;
    std::set<NodeId> everyone;
    for (const auto& n : s.nodes) {
        everyone.insert(n.id);
        Value input = n.input.value_or(Value::of(0));
        machines.emplace(n.id, EarlyConsensus(n.id, input));
        if (!n.faulty) ct.inputs[n.id] = input;
    }

    Bus bus(truth, true);
    auto adversary = make_adversary(s);
    int horizon = s.horizon();

    for (int round = 1; round <= horizon; ++round) {
        bus.advance();
        std::map<NodeId, std::vector<Outgoing>> correct_out;
        std::map<NodeId, std::vector<Outgoing>> shadow_out;
        for (auto& [id, machine] : machines) {
            std::vector<Outgoing> outbox;
            if (round == 1) {
                outbox = as_broadcasts(machine.init());
            } else if (!machine.terminated()) {
                auto step = machine.step(bus.take(id));
                outbox = as_broadcasts(step.outbox);
                if (truth.correct.count(id)) {
                    for (auto& obs : step.observations) {
                        ct.observations[id].push_back(obs);
                    }
                    if (step.coordinator) {
                        ct.coordinators[id][machine.phase()] = *step.coordinator;
                    }
                    if (machine.subround() == EarlyConsensus::Subround::R5) {
                        ct.opinion_at_phase_end[id][machine.phase()] = machine.opinion();
                        ct.phases_run = std::max(ct.phases_run, machine.phase());
                    }
                    if (step.terminated_now) {
                        ct.outputs[id] = *machine.output();
                        ct.termination_round[id] = round;
                    }
                }
            }
            (truth.correct.count(id) ? correct_out : shadow_out)[id] = std::move(outbox);
        }

        Adversary::View view;
        view.round = round;
        view.correct = &truth.correct;
        view.byzantine = &truth.faulty;
        view.correct_outboxes = &correct_out;
        view.shadow_outboxes = &shadow_out;
        view.opinion_of = [&](NodeId id) { return machines.at(id).opinion(); };
        auto byz_sends = run_adversary(*adversary, view, truth.faulty);

        for (const auto& [id, outbox] : correct_out) {
            for (const Outgoing& o : outbox) bus.send(round, id, o, everyone);
        }
        for (const auto& [id, outbox] : byz_sends) {
            for (const Outgoing& o : outbox) bus.send(round, id, o, everyone);
        }
        truth.rounds_executed = round;

        bool all_done = true;
        for (NodeId id : truth.correct) {
            if (!machines.at(id).terminated()) all_done = false;
        }
        if (all_done) break;
    }
    truth.detail = std::move(ct);
    result.verdict = verify_run(s, truth);
    return result;
}

// ---------------------------------------------------------------- approximate agreement

RunResult run_approx(const Scenario& s) {
    RunResult result;
    GroundTruth& truth = result.truth;
    truth.correct = s.correct_ids();
    truth.faulty = s.faulty_ids();
    ApproxTruth at;

    std::map<NodeId, Value> values;
    std::set<NodeId> everyone;
    for (const auto& n : s.nodes) {
        everyone.insert(n.id);
        values[n.id] = n.input.value_or(Value::of(0));
        if (!n.faulty) at.trajectories[n.id] = {values[n.id]};
    }

    Bus bus(truth, true);
    auto adversary = make_adversary(s);

    for (int round = 1; round <= s.iterations; ++round) {
        std::map<NodeId, std::vector<Outgoing>> correct_out;
        std::map<NodeId, std::vector<Outgoing>> shadow_out;
        for (const auto& [id, v] : values) {
            auto& out = truth.correct.count(id) ? correct_out : shadow_out;
            out[id] = {Outgoing{std::nullopt, Payload::input(v)}};
        }

        Adversary::View view;
        view.round = round;
        view.correct = &truth.correct;
        view.byzantine = &truth.faulty;
        view.correct_outboxes = &correct_out;
        view.shadow_outboxes = &shadow_out;
        view.opinion_of = [&](NodeId id) { return values.at(id); };
        auto byz_sends = run_adversary(*adversary, view, truth.faulty);

        for (const auto& [id, outbox] : correct_out) {
            for (const Outgoing& o : outbox) bus.send(round - 1, id, o, everyone);
        }
        for (const auto& [id, outbox] : byz_sends) {
            for (const Outgoing& o : outbox) bus.send(round - 1, id, o, everyone);
        }

        // Deliver and fold: R_v keeps one value per sender (the smallest, when
        // a Byzantine node offers several in one round).
        bus.advance();
        std::map<NodeId, Value> next = values;
        for (auto& [id, v] : values) {
            RoundInbox inbox = bus.take(id);
            std::map<NodeId, Value> per_sender;
            inbox.for_each([&](NodeId from, const Payload& p) {
                if (p.kind != MsgKind::Input || p.value.is_bottom()) return;
                auto it = per_sender.find(from);
                if (it == per_sender.end() || p.value < it->second) {
                    per_sender[from] = p.value;
                }
            });
            std::vector<Value> multiset;
            for (const auto& [from, val] : per_sender) multiset.push_back(val);
            if (multiset.empty()) multiset.push_back(v);  // degenerate guard
            auto trimmed = aa_trim(multiset);
            next[id] = trimmed.front().midpoint(trimmed.back());
            if (truth.correct.count(id)) {
                at.trajectories[id].push_back(next[id]);
                at.trimmed_intervals[id].push_back({trimmed.front(), trimmed.back()});
            }
        }
        values = std::move(next);
        truth.rounds_executed = round;
    }
    truth.detail = std::move(at);
    result.verdict = verify_run(s, truth);
    return result;
}

// ---------------------------------------------------------------- parallel consensus

RunResult run_parallel(const Scenario& s) {
    RunResult result;
    GroundTruth& truth = result.truth;
    truth.correct = s.correct_ids();
    truth.faulty = s.faulty_ids();
    ParallelTruth pt;

    std::map<NodeId, ParallelConsensus> machines;
    std::set<NodeId> everyone;
    for (const auto& n : s.nodes) {
        everyone.insert(n.id);
        machines.emplace(n.id, ParallelConsensus(n.id, n.pairs));
        if (!n.faulty) {
            for (const auto& [key, value] : n.pairs) pt.inputs[n.id][key] = value;
        }
    }

    Bus bus(truth, true);
    auto adversary = make_adversary(s);
    int horizon = s.horizon();

    for (int round = 1; round <= horizon; ++round) {
        bus.advance();
        std::map<NodeId, std::vector<Outgoing>> correct_out;
        std::map<NodeId, std::vector<Outgoing>> shadow_out;
        for (auto& [id, machine] : machines) {
            std::vector<Outgoing> outbox;
            if (round == 1) {
                outbox = as_broadcasts(machine.init());
            } else {
                auto step = machine.step(bus.take(id));
                outbox = as_broadcasts(step.outbox);
                if (truth.correct.count(id)) {
                    if (round == 2) pt.frozen_members[id] = machine.members();
                    if (step.coordinator) {
                        pt.coordinators[id][machine.phase()] = *step.coordinator;
                    }
                    for (const PcTermination& t : step.terminations) {
                        pt.termination_round[id][t.key] = t.round;
                        if (t.output) pt.outputs[id][t.key] = *t.output;
                    }
                }
            }
            (truth.correct.count(id) ? correct_out : shadow_out)[id] = std::move(outbox);
        }

        Adversary::View view;
        view.round = round;
        view.correct = &truth.correct;
        view.byzantine = &truth.faulty;
        view.correct_outboxes = &correct_out;
        view.shadow_outboxes = &shadow_out;
        auto byz_sends = run_adversary(*adversary, view, truth.faulty);

        for (const auto& [id, outbox] : correct_out) {
            for (const Outgoing& o : outbox) bus.send(round, id, o, everyone);
        }
        for (const auto& [id, outbox] : byz_sends) {
            for (const Outgoing& o : outbox) bus.send(round, id, o, everyone);
        }
        truth.rounds_executed = round;

        bool all_done = true;
        for (NodeId id : truth.correct) {
            if (!machines.at(id).resolved()) all_done = false;
        }
        if (all_done) break;
    }

    for (NodeId id : truth.correct) {
        const ParallelConsensus& m = machines.at(id);
        pt.resolved[id] = m.resolved();
        for (std::uint64_t key : m.instance_keys()) {
            pt.created_round[id][key] = m.instance(key)->created_round();
        }
    }
    truth.detail = std::move(pt);
    result.verdict = verify_run(s, truth);
    return result;
}

// ---------------------------------------------------------------- dynamic total order

RunResult run_dynamic(const Scenario& s) {
    RunResult result;
    GroundTruth& truth = result.truth;
    truth.correct = s.correct_ids();
    truth.faulty = s.faulty_ids();
    DynamicTruth dt;

    std::set<NodeId> genesis;
    for (const auto& n : s.nodes) {
        if (!n.join_round) genesis.insert(n.id);
    }

    std::map<NodeId, DynamicOrderNode> hosts;
    for (const auto& n : s.nodes) {
        if (n.join_round) {
            hosts.emplace(n.id, DynamicOrderNode::joiner(n.id, *n.join_round));
        } else {
            hosts.emplace(n.id, DynamicOrderNode::founder(n.id, genesis, 1));
        }
    }

    std::map<int, std::map<NodeId, Value>> extra_events;
    for (const auto& e : s.events) extra_events[e.round][e.node] = e.value;

    Bus bus(truth, s.log_deliveries);
    auto adversary = make_adversary(s);
    int horizon = s.horizon();

    for (int round = 1; round <= horizon; ++round) {
        bus.advance();
        std::set<NodeId> recipients;
        for (const auto& [id, host] : hosts) {
            if (!host.halted()) recipients.insert(id);
        }

        std::map<NodeId, std::vector<Outgoing>> correct_out;
        std::map<NodeId, std::vector<Outgoing>> shadow_out;
        for (auto& [id, host] : hosts) {
            const NodeSpec* spec = s.find(id);
            if (spec->leave_round && *spec->leave_round == round) host.request_leave();
            std::optional<Value> own_event;
            if (s.submitter && *s.submitter == id) own_event = Value::of(round);
            auto it = extra_events.find(round);
            if (it != extra_events.end()) {
                auto jt = it->second.find(id);
                if (jt != it->second.end()) own_event = jt->second;
            }
            if (host.halted()) continue;
            auto step = host.step(round, bus.take(id), own_event);
            std::vector<Outgoing> outbox = as_broadcasts(step.broadcasts);
            for (const auto& [to, p] : step.directs) outbox.push_back(Outgoing{to, p});
            bool correct = truth.correct.count(id) > 0;
            if (correct) {
                if (own_event && s.submitter && *s.submitter == id) {
                    dt.submitted_events.push_back(EventSpec{round, id, *own_event});
                }
                for (const ChainEntry& e : step.chain_delta) {
                    dt.chains[id].push_back({e, round});
                }
                if (host.active()) dt.round_counter[id][round] = host.current_round();
                dt.final_upto[id][round] = host.finalized_upto();
                if (host.halted()) dt.halted_round[id] = round;
            }
            (correct ? correct_out : shadow_out)[id] = std::move(outbox);
        }

        Adversary::View view;
        view.round = round;
        view.correct = &truth.correct;
        view.byzantine = &truth.faulty;
        view.correct_outboxes = &correct_out;
        view.shadow_outboxes = &shadow_out;
        auto byz_sends = run_adversary(*adversary, view, truth.faulty);

        for (const auto& [id, outbox] : correct_out) {
            for (const Outgoing& o : outbox) bus.send(round, id, o, recipients);
        }
        for (const auto& [id, outbox] : byz_sends) {
            for (const Outgoing& o : outbox) bus.send(round, id, o, recipients);
        }
        truth.rounds_executed = round;
    }

    for (NodeId id : truth.correct) {
        const DynamicOrderNode& host = hosts.at(id);
        dt.first_run[id] = host.first_run();
        dt.snapshots[id] = host.snapshots();
        dt.term_log[id] = host.termination_log();
        if (host.join_failed()) {
            throw ProtocolError("join failed at correct node " + to_string(id));
        }
    }
    truth.detail = std::move(dt);
    result.verdict = verify_run(s, truth);
    return result;
}

}  // namespace

RunResult run_scenario(const Scenario& s) {
    s.validate();
    switch (s.protocol) {
        case Protocol::Rb: return run_rb(s);
        case Protocol::Rotor: return run_rotor(s);
        case Protocol::Consensus: return run_consensus(s);
        case Protocol::Approx: return run_approx(s);
        case Protocol::Parallel: return run_parallel(s);
        case Protocol::Dynamic: return run_dynamic(s);
        case Protocol::PartitionDemo:
            throw ScenarioError("partition_demo runs through run_partition_demo");
    }
    throw ScenarioError("unknown protocol");
}

std::string dump_trace(const GroundTruth& truth) {
    std::string out;
    for (const Delivery& d : truth.deliveries) {
        out += std::to_string(d.round);
        out += '\t';
        out += to_string(d.from);
        out += '\t';
        out += to_string(d.to);
        out += '\t';
        out += to_string(d.payload);
        out += '\n';
    }
    return out;
}

}  // namespace idbft::sim
