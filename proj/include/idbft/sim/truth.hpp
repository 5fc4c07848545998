// Omniscient ground truth recorded while a scenario runs. The verifiers
// check every lemma-level property against this record.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "idbft/consensus.hpp"
#include "idbft/dynamic_total_order.hpp"
#include "idbft/rotor.hpp"
#include "idbft/types.hpp"

namespace idbft::sim {

struct Delivery {
    int round = 0;  // delivery round
    NodeId from{};
    NodeId to{};
    Payload payload{};
};

struct RbTruth {
    NodeId sender{};
    std::optional<Value> designated_body;                // body of a correct sender
    std::map<NodeId, std::map<Value, int>> accept_round; // correct nodes only
};

struct RotorTruth {
    std::map<NodeId, Value> opinions;  // scenario-provided opinions
    std::map<NodeId, std::vector<NodeId>> selections;  // index = iteration
    std::map<NodeId, std::vector<std::pair<int, NodeId>>> insertions;
    std::map<NodeId, std::vector<RotorEvent>> events;
    std::map<NodeId, int> termination_iteration;  // iteration of the break
    std::map<NodeId, std::vector<NodeId>> first_selection_candidates;
};

struct ConsensusTruth {
    std::map<NodeId, Value> inputs;                     // correct nodes
    std::map<NodeId, Value> outputs;
    std::map<NodeId, int> termination_round;
    std::map<NodeId, std::vector<QuorumObservation>> observations;
    std::map<NodeId, std::map<int, NodeId>> coordinators;       // phase -> selection
    std::map<NodeId, std::map<int, Value>> opinion_at_phase_end;
    int phases_run = 0;
};

struct ApproxTruth {
    // trajectories[node] has iterations+1 entries (inputs included).
    std::map<NodeId, std::vector<Value>> trajectories;
    // Trimmed interval [min S_v, max S_v] per node per iteration.
    std::map<NodeId, std::vector<std::pair<Value, Value>>> trimmed_intervals;
};

struct ParallelTruth {
    std::map<NodeId, std::map<std::uint64_t, Value>> inputs;   // correct nodes
    std::map<NodeId, std::map<std::uint64_t, Value>> outputs;
    std::map<NodeId, std::map<std::uint64_t, int>> created_round;
    std::map<NodeId, std::map<std::uint64_t, int>> termination_round;
    std::map<NodeId, std::set<NodeId>> frozen_members;
    std::map<NodeId, std::map<int, NodeId>> coordinators;  // phase -> selection
    std::map<NodeId, bool> resolved;
};

struct DynamicTruth {
    std::map<NodeId, std::vector<std::pair<ChainEntry, int>>> chains;  // entry, append round
    std::map<NodeId, std::int64_t> first_run;
    std::map<NodeId, std::map<std::int64_t, std::set<NodeId>>> snapshots;
    std::map<NodeId, std::map<std::int64_t, std::map<std::uint64_t, int>>> term_log;
    std::map<NodeId, std::map<int, std::int64_t>> final_upto;   // global round -> R
    std::map<NodeId, std::map<int, std::int64_t>> round_counter;
    std::map<NodeId, int> halted_round;
    std::vector<EventSpec> submitted_events;  // events injected at correct nodes
};

struct GroundTruth {
    std::set<NodeId> correct;
    std::set<NodeId> faulty;
    int rounds_executed = 0;
    std::uint64_t deliveries_count = 0;
    std::vector<Delivery> deliveries;  // populated when delivery logging is on
    std::variant<RbTruth, RotorTruth, ConsensusTruth, ApproxTruth, ParallelTruth,
                 DynamicTruth>
        detail;
};

// Line-delimited trace: "round<TAB>sender<TAB>recipient<TAB>payload".
std::string dump_trace(const GroundTruth& truth);

}  // namespace idbft::sim
