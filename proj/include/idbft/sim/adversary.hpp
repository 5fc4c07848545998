// The pluggable omniscient Byzantine adversary. Strategies see the whole
// current round (correct outboxes included) before choosing per-recipient
// payloads; the engine stamps true sender identifiers, so impersonation is
// impossible by construction.

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "idbft/inbox.hpp"
#include "idbft/sim/scenario.hpp"
#include "idbft/types.hpp"

namespace idbft::sim {

struct Outgoing {
    std::optional<NodeId> to;  // nullopt = broadcast
    Payload payload{};
};

class Adversary {
public:
    struct View {
        int round = 0;
        const std::set<NodeId>* correct = nullptr;
        const std::set<NodeId>* byzantine = nullptr;
        // This round's outboxes of the correct nodes (omniscient preview).
        const std::map<NodeId, std::vector<Outgoing>>* correct_outboxes = nullptr;
        // What each Byzantine node would send if it were correct.
        const std::map<NodeId, std::vector<Outgoing>>* shadow_outboxes = nullptr;
        // Current opinion of a correct node, when the protocol has one.
        std::function<Value(NodeId)> opinion_of;
    };

    virtual ~Adversary() = default;

    // Payload lists per Byzantine node. Keys must be Byzantine identifiers;
    // the engine rejects anything else as an impersonation attempt.
    virtual std::map<NodeId, std::vector<Outgoing>> act(const View& view) = 0;
};

// Known strategy names, in catalog order.
const std::vector<std::string>& adversary_catalog();

std::unique_ptr<Adversary> make_adversary(const Scenario& scenario);

}  // namespace idbft::sim
