// Early-terminating consensus on top of the rotor-coordinator. Rounds 1-2
// initialize the rotor and freeze n_v; afterwards every phase is exactly five
// rounds: input, prefer, strongprefer, rotor, decide. Strongprefer messages
// are delivered during the rotor round and processed in the decide round.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "idbft/inbox.hpp"
#include "idbft/registry.hpp"
#include "idbft/rotor.hpp"
#include "idbft/types.hpp"

namespace idbft {

// Observation of the quorum counts a node acted on, for the trace verifier.
// `round` is the round the counted messages were delivered in.
struct QuorumObservation {
    int round = 0;
    MsgKind kind = MsgKind::Input;
    std::map<Value, int> counts;
    std::int64_t n_v = 0;
};

// The silent-sender rule: every registered sender that has gone silent (no
// message this phase, which a live correct node cannot do because it always
// broadcasts its input) is assumed to have sent what this node itself
// broadcast in the previous round. `silent` is the set of such senders still
// absent from this round's inbox.
RoundInbox substitute_missing(const std::set<NodeId>& silent,
                              const std::optional<Payload>& last_sent,
                              const RoundInbox& inbox);

// Deterministic pick among values whose count passes the threshold test:
// highest count first, then smallest value. Unreachable ties under n > 3f;
// kept for fuzzing with invalid scenarios.
std::optional<Value> best_quorum_value(const std::map<Value, int>& counts,
                                       std::int64_t n_v,
                                       bool (*threshold)(std::int64_t, std::int64_t));

class EarlyConsensus {
public:
    enum class Subround { Init1 = -1, Init2 = 0, R1 = 1, R2 = 2, R3 = 3, R4 = 4, R5 = 5 };

    struct Step {
        std::vector<Payload> outbox;
        std::vector<QuorumObservation> observations;
        std::optional<NodeId> coordinator;  // rotor selection made this round (R4)
        bool terminated_now = false;
    };

    EarlyConsensus(NodeId self, Value input);

    std::vector<Payload> init();          // round 1: rotor init broadcast
    Step step(const RoundInbox& inbox);   // rounds 2, 3, ... in order

    bool terminated() const { return terminated_; }
    std::optional<Value> output() const { return output_; }
    Value opinion() const { return opinion_; }
    int round() const { return round_; }
    int phase() const;                    // 1-based; 0 during initialization
    Subround subround() const;
    std::int64_t n_v() const { return frozen_ ? frozen_->n_v() : 0; }
    const std::set<NodeId>& members() const;
    const RotorCoordinator& rotor() const { return rotor_; }

private:
    NodeId self_;
    Value opinion_;
    RotorCoordinator rotor_;
    std::optional<SenderRegistry> frozen_;
    RoundInbox rotor_buffer_;
    std::set<NodeId> heard_this_phase_;
    std::optional<Payload> last_sent_;
    std::map<Value, int> buffered_sp_counts_;
    int sp_delivery_round_ = 0;
    std::optional<NodeId> phase_coordinator_;
    int round_ = 0;
    bool terminated_ = false;
    std::optional<Value> output_;

    void buffer_rotor_traffic(const RoundInbox& inbox);
};

}  // namespace idbft
