// Rotor-coordinator: rotate through candidate coordinators gathered in
// reliable-broadcast fashion until one is reselected. Every correct node is
// guaranteed one round in which all correct nodes accept the opinion of a
// common correct coordinator.

#pragma once

#include <optional>
#include <vector>

#include "idbft/inbox.hpp"
#include "idbft/registry.hpp"
#include "idbft/types.hpp"

namespace idbft {

struct RotorEvent {
    enum class Kind { OpinionAccepted, Terminated };
    Kind kind;
    NodeId from{};   // OpinionAccepted: the coordinator whose opinion was taken
    Value value{};   // OpinionAccepted
    int iteration = 0;
};

class RotorCoordinator {
public:
    struct Step {
        std::vector<Payload> outbox;
        std::vector<RotorEvent> events;
        std::optional<NodeId> selected;  // coordinator picked this iteration
    };

    explicit RotorCoordinator(NodeId self) : self_(self) {}

    // Round 1: broadcast init.
    std::vector<Payload> init();

    // First call after init() is the echo phase (round 2): echo(p) for every
    // init received. Subsequent calls are loop iterations. When embedded, one
    // call corresponds to one rotor round regardless of real-round spacing;
    // the caller buffers in-flight rotor traffic into `inbox`.
    //
    // own_opinion, when present, is broadcast as opinion(x) if this node is
    // the selected coordinator. Embedders that namespace opinions themselves
    // pass nullopt and read selected() instead.
    Step step(const RoundInbox& inbox, std::optional<Value> own_opinion);

    bool terminated() const { return terminated_; }
    int iterations() const { return iteration_; }  // completed loop iterations
    std::int64_t n_v() const { return registry_.n_v(); }
    const std::vector<NodeId>& candidates() const { return candidates_; }
    const std::vector<NodeId>& selections() const { return selections_; }
    const std::vector<std::pair<int, NodeId>>& insertion_log() const {
        return insertion_log_;
    }
    const std::vector<NodeId>& candidates_at_first_selection() const {
        return candidates_at_first_selection_;
    }

private:
    NodeId self_;
    SenderRegistry registry_ = SenderRegistry::growing();
    std::vector<NodeId> candidates_;       // C_v, ascending
    std::vector<NodeId> selected_set_;     // S_v (insertion order irrelevant)
    std::optional<NodeId> prev_coordinator_;
    int iteration_ = 0;                    // r
    int stage_ = 0;                        // 0 fresh, 1 inited, 2 looping
    bool terminated_ = false;

    std::vector<NodeId> selections_;
    std::vector<std::pair<int, NodeId>> insertion_log_;
    std::vector<NodeId> candidates_at_first_selection_;

    bool in_candidates(NodeId p) const;
    void insert_candidate(NodeId p);
};

}  // namespace idbft
