// The asynchrony counterexample as an exhibit: two blocks with opposite
// inputs, cross-block delivery delayed beyond intra-block decision time, run
// under the plain consensus protocol. Demonstrates disagreement; asserts
// nothing.

#pragma once

#include <map>
#include <string>

#include "idbft/sim/scenario.hpp"
#include "idbft/types.hpp"

namespace idbft::sim {

struct PartitionReport {
    std::map<NodeId, Value> outputs;         // correct nodes that decided
    std::map<NodeId, int> decision_round;
    bool disagreement = false;               // two distinct outputs observed
    int cross_delay = 0;
    int rounds_executed = 0;
};

// Blocks are defined by the scenario inputs: input 1 = block A, 0 = block B.
// Intra-block delay is one round; cross-block delay is scenario.cross_delay.
PartitionReport run_partition_demo(const Scenario& scenario);

std::string describe(const PartitionReport& report);

}  // namespace idbft::sim
