// Scenario descriptions for the lockstep simulator.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "idbft/types.hpp"

namespace idbft::sim {

enum class Protocol { Rb, Rotor, Consensus, Approx, Parallel, Dynamic, PartitionDemo };

const char* to_string(Protocol p);
std::optional<Protocol> protocol_from_string(const std::string& s);

struct NodeSpec {
    NodeId id{};
    bool faulty = false;
    std::optional<Value> input;                           // rb body / opinion / input
    std::vector<std::pair<std::uint64_t, Value>> pairs;   // parallel input pairs
    std::optional<int> join_round;                        // dynamic: absent = founder
    std::optional<int> leave_round;
};

struct EventSpec {
    int round = 0;
    NodeId node{};
    Value value{};
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Scenario {
    Protocol protocol = Protocol::Rb;
    std::vector<NodeSpec> nodes;
    std::string adversary = "silent";
    std::map<std::string, std::int64_t> adversary_params;
    int rounds = 0;  // 0 = per-protocol default horizon
    std::uint64_t seed = 0;
    int iterations = 1;     // approx agreement
    int cross_delay = 1;    // partition demo
    std::optional<NodeId> submitter;  // dynamic: submits an event every round
    std::vector<EventSpec> events;    // dynamic: additional one-shot events
    bool allow_invalid_resilience = false;  // negative-control scenarios
    bool expect_fail = false;               // suite-level expectation inversion
    bool log_deliveries = true;

    std::set<NodeId> correct_ids() const;
    std::set<NodeId> faulty_ids() const;
    const NodeSpec* find(NodeId id) const;
    int horizon() const;

    // Throws ScenarioError on structural problems: duplicate ids, missing
    // designated sender, resilience violations, malformed churn.
    void validate() const;
};

}  // namespace idbft::sim
