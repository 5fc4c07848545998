#include "idbft/sim/partition.hpp"

#include <map>
#include <vector>

#include "idbft/consensus.hpp"
#include "idbft/inbox.hpp"

namespace idbft::sim {

PartitionReport run_partition_demo(const Scenario& s) {
    s.validate();
    PartitionReport report;
    report.cross_delay = s.cross_delay;

    std::map<NodeId, EarlyConsensus> machines;
    std::map<NodeId, bool> block_a;
    for (const auto& n : s.nodes) {
        machines.emplace(n.id, EarlyConsensus(n.id, *n.input));
        block_a[n.id] = n.input->as_int() == 1;
    }
    auto delay = [&](NodeId from, NodeId to) {
        return block_a.at(from) == block_a.at(to) ? 1 : s.cross_delay;
    };

    // pending[r][node] = inbox scheduled for delivery at round r
    std::map<int, std::map<NodeId, RoundInbox>> pending;
    auto send = [&](int round, NodeId from, const Payload& p) {
        for (const auto& [to, unused] : machines) {
            pending[round + delay(from, to)][to].add(from, p);
        }
    };

    int horizon = s.horizon();
    for (int round = 1; round <= horizon; ++round) {
        auto slot = pending.find(round);
        for (auto& [id, machine] : machines) {
            if (machine.terminated()) continue;
            std::vector<Payload> outbox;
            if (round == 1) {
                outbox = machine.init();
            } else {
                RoundInbox inbox;
                if (slot != pending.end()) {
                    auto it = slot->second.find(id);
                    if (it != slot->second.end()) inbox = std::move(it->second);
                }
                auto step = machine.step(inbox);
                outbox = std::move(step.outbox);
                if (step.terminated_now) {
                    report.outputs[id] = *machine.output();
                    report.decision_round[id] = round;
                }
            }
            for (const Payload& p : outbox) send(round, id, p);
        }
        if (slot != pending.end()) pending.erase(slot);
        report.rounds_executed = round;
        bool all_done = true;
        for (const auto& [id, machine] : machines) {
            if (!machine.terminated()) all_done = false;
        }
        if (all_done) break;
    }

    std::set<Value> decided;
    for (const auto& [id, value] : report.outputs) decided.insert(value);
    report.disagreement = decided.size() > 1;
    return report;
}

std::string describe(const PartitionReport& r) {
    std::string out = "cross_delay=" + std::to_string(r.cross_delay) +
                      " rounds=" + std::to_string(r.rounds_executed) + "\n";
    for (const auto& [id, value] : r.outputs) {
        out += "node " + to_string(id) + " decided " + to_string(value) + " at round " +
               std::to_string(r.decision_round.at(id)) + "\n";
    }
    out += r.disagreement ? "result: disagreement (blocks decided differently)\n"
                          : "result: no disagreement\n";
    return out;
}

}  // namespace idbft::sim
