// Total ordering of events in a dynamic network: one parallel-consensus run
// per round over the tracked membership, with arithmetic finality. Messages
// of run r carry r as their namespace tag; instance keys inside a run are the
// submitter identifiers.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "idbft/inbox.hpp"
#include "idbft/parallel_consensus.hpp"
#include "idbft/types.hpp"

namespace idbft {

struct ChainEntry {
    std::int64_t instance_round = 0;
    NodeId submitter{};
    Value event{};
    auto operator<=>(const ChainEntry&) const = default;
};

// Majority join: acks as (acknowledged round, sender). Returns nothing when
// no round value holds a strict majority (possible only under broken
// resilience).
struct JoinResult {
    std::int64_t round = 0;
    std::set<NodeId> members;
};
std::optional<JoinResult> dto_join(
    const std::vector<std::pair<std::int64_t, NodeId>>& acks);

// Round r' is final at round r iff r - r' > 5*|S^{r'}|/2 + 2, in integers.
inline bool dto_round_final(std::int64_t now, std::int64_t inst_round,
                            std::int64_t snapshot_size) {
    return 2 * (now - inst_round) > 5 * snapshot_size + 4;
}

class DynamicOrderNode {
public:
    struct StepOut {
        std::vector<Payload> broadcasts;
        std::vector<std::pair<NodeId, Payload>> directs;  // ack replies
        std::vector<ChainEntry> chain_delta;
    };

    // A founding member: active from start_round with the genesis membership
    // as common knowledge.
    static DynamicOrderNode founder(NodeId self, std::set<NodeId> genesis,
                                    int start_round);

    // A node joining at join_round: broadcasts present, initializes itself
    // from the ack majority two rounds later, and enters the loop after that.
    static DynamicOrderNode joiner(NodeId self, int join_round);

    StepOut step(int global_round, const RoundInbox& inbox,
                 std::optional<Value> own_event);

    void request_leave() { leave_requested_ = true; }
    bool halted() const { return halted_; }
    bool active() const { return phase_ == Phase::Looping && !halted_; }

    const std::vector<ChainEntry>& chain() const { return chain_; }
    std::int64_t finalized_upto() const { return final_upto_; }
    std::int64_t current_round() const { return round_; }
    std::int64_t first_run() const { return first_run_; }
    const std::set<NodeId>& member_view() const { return members_; }
    const std::map<std::int64_t, std::set<NodeId>>& snapshots() const {
        return snapshots_;
    }
    // Termination round per (run, submitter key), for the verifier.
    const std::map<std::int64_t, std::map<std::uint64_t, int>>& termination_log() const {
        return termination_log_;
    }
    bool join_failed() const { return join_failed_; }

private:
    enum class Phase { WaitingToJoin, WaitingForAcks, Looping };

    DynamicOrderNode(NodeId self, Phase phase) : self_(self), phase_(phase) {}

    NodeId self_;
    Phase phase_;
    int join_round_ = 0;
    std::int64_t round_ = 0;  // r
    std::set<NodeId> members_;  // S
    std::int64_t first_run_ = 0;
    bool leave_requested_ = false;
    bool draining_ = false;
    bool halted_ = false;
    bool join_failed_ = false;

    std::map<std::int64_t, ParallelConsensus> runs_;
    std::map<std::int64_t, std::set<NodeId>> snapshots_;         // S^r
    std::map<std::int64_t, std::map<std::uint64_t, Value>> results_;
    std::map<std::int64_t, std::map<std::uint64_t, int>> termination_log_;
    std::int64_t final_upto_ = 0;  // R
    std::vector<ChainEntry> chain_;
};

}  // namespace idbft
