#include "idbft/sim/scenario.hpp"

#include <algorithm>

#include "idbft/parallel_consensus.hpp"

namespace idbft::sim {

const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::Rb: return "rb";
        case Protocol::Rotor: return "rotor";
        case Protocol::Consensus: return "consensus";
        case Protocol::Approx: return "approx";
        case Protocol::Parallel: return "parallel";
        case Protocol::Dynamic: return "dynamic";
        case Protocol::PartitionDemo: return "partition_demo";
    }
    return "?";
}

std::optional<Protocol> protocol_from_string(const std::string& s) {
    for (Protocol p : {Protocol::Rb, Protocol::Rotor, Protocol::Consensus,
                       Protocol::Approx, Protocol::Parallel, Protocol::Dynamic,
                       Protocol::PartitionDemo}) {
        if (s == to_string(p)) return p;
    }
    return std::nullopt;
}

std::set<NodeId> Scenario::correct_ids() const {
    std::set<NodeId> out;
    for (const auto& n : nodes) {
        if (!n.faulty) out.insert(n.id);
    }
    return out;
}

std::set<NodeId> Scenario::faulty_ids() const {
    std::set<NodeId> out;
    for (const auto& n : nodes) {
        if (n.faulty) out.insert(n.id);
    }
    return out;
}

const NodeSpec* Scenario::find(NodeId id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

int Scenario::horizon() const {
    if (rounds > 0) return rounds;
    int n = static_cast<int>(nodes.size());
    int f = static_cast<int>(faulty_ids().size());
    switch (protocol) {
        case Protocol::Rb: return 8;
        case Protocol::Rotor: return n + 6;
        case Protocol::Consensus: return 2 + 5 * (2 * f + 5);
        case Protocol::Approx: return iterations;
        case Protocol::Parallel: return 2 + 5 * (2 * f + 6);
        case Protocol::Dynamic: return 60;
        case Protocol::PartitionDemo: return 2 * cross_delay + 16;
    }
    return 16;
}

void Scenario::validate() const {
    if (nodes.empty()) throw ScenarioError("scenario has no nodes");
    std::set<NodeId> seen;
    for (const auto& n : nodes) {
        if (!seen.insert(n.id).second) {
            throw ScenarioError("duplicate node id " + to_string(n.id));
        }
        if (n.id.value == ~std::uint64_t{0}) {
            throw ScenarioError("reserved node id");
        }
        for (const auto& [key, value] : n.pairs) {
            if (key == kRotorInstanceKey) throw ScenarioError("reserved pair id");
            if (value.is_bottom()) throw ScenarioError("bottom is not a valid pair input");
        }
        if (n.join_round || n.leave_round) {
            if (protocol != Protocol::Dynamic) {
                throw ScenarioError("churn on a non-dynamic scenario");
            }
            if (n.join_round && *n.join_round < 1) throw ScenarioError("bad join round");
            if (n.join_round && n.leave_round && *n.leave_round <= *n.join_round + 2) {
                throw ScenarioError("leave before join completes");
            }
        }
    }

    if (protocol == Protocol::Rb) {
        int with_input = 0;
        for (const auto& n : nodes) with_input += n.input.has_value();
        if (with_input != 1) {
            throw ScenarioError("rb scenario needs exactly one designated sender body");
        }
    }
    if (protocol == Protocol::Rotor || protocol == Protocol::Consensus ||
        protocol == Protocol::Approx || protocol == Protocol::PartitionDemo) {
        for (const auto& n : nodes) {
            if (!n.faulty && !n.input) {
                throw ScenarioError("correct node " + to_string(n.id) + " needs an input");
            }
        }
    }
    if (protocol == Protocol::Dynamic) {
        if (submitter) {
            const NodeSpec* s = find(*submitter);
            if (!s || s->faulty) throw ScenarioError("submitter must be a correct node");
            if (s->join_round || s->leave_round) {
                throw ScenarioError("submitter must be a stable founder");
            }
        }
        for (const auto& e : events) {
            if (!find(e.node)) throw ScenarioError("event from unknown node");
        }
    }
    if (protocol == Protocol::PartitionDemo) {
        if (cross_delay < 1) throw ScenarioError("cross delay must be >= 1");
        for (const auto& n : nodes) {
            if (n.faulty) throw ScenarioError("partition demo runs fault-free");
            if (n.input && !n.input->is_bottom() && n.input->den() == 1 &&
                (n.input->num() == 0 || n.input->num() == 1)) {
                continue;
            }
            throw ScenarioError("partition demo inputs must be 0 or 1");
        }
    }

    if (allow_invalid_resilience) return;

    if (protocol == Protocol::Dynamic) {
        // n > 3f must hold at every round start under the churn schedule.
        int last = horizon();
        for (int r = 1; r <= last; ++r) {
            int active_n = 0;
            int active_f = 0;
            for (const auto& n : nodes) {
                int jr = n.join_round.value_or(1);
                int lr = n.leave_round.value_or(last + 1);
                if (jr <= r && r < lr) {
                    ++active_n;
                    if (n.faulty) ++active_f;
                }
            }
            if (active_n <= 3 * active_f) {
                throw ScenarioError("resilience violated at round " + std::to_string(r));
            }
        }
    } else {
        int n = static_cast<int>(nodes.size());
        int f = static_cast<int>(faulty_ids().size());
        if (n <= 3 * f) {
            throw ScenarioError("scenario violates n > 3f (mark invalid-resilience to allow)");
        }
    }
}

}  // namespace idbft::sim
