// Identifier-tagged consensus instances run in parallel on one shared rotor
// and one shared frozen registry. Nodes unaware of an instance are joined in
// mid-flight during the first phase; their missing opinions are filled with
// bottom. Explicit nopreference / nostrongpreference markers distinguish "no
// quorum" from "not participating".

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

// Reserved key for namespaced rotor traffic when a run tag is in use.
inline constexpr std::uint64_t kRotorInstanceKey = ~std::uint64_t{0};

// The per-instance machine, factored out so the verifier can replay an
// adopted instance as if it had been aware from the start with input bottom.
class PcInstanceCore {
public:
    PcInstanceCore(Value initial, int created_round)
        : x_(initial), created_round_(created_round) {}

    struct Eval {
        std::map<Value, int> counts;   // actual typed messages per value
        bool any_typed = false;        // at least one typed message arrived
        std::set<NodeId> blockers;     // senders of the type or its marker
    };

    // R1: the value to broadcast as id:input, if any.
    std::optional<Value> input_send();

    // R2: returns prefer(x) or the nopreference marker (untagged template).
    Payload eval_input(const Eval& e, const std::set<NodeId>& members,
                       std::int64_t n, bool phase1);

    // R3: opinion update plus strongprefer(x) or nostrongpreference.
    Payload eval_prefer(const Eval& e, const std::set<NodeId>& members,
                        std::int64_t n, bool phase1);

    struct Decision {
        bool terminated_now = false;
        std::optional<Value> output;  // present only for non-bottom outputs
    };

    // R5: strongprefer counts buffered from the rotor round, plus the
    // coordinator opinion c delivered this round (if any).
    Decision eval_strongprefer(const Eval& e, std::optional<Value> c,
                               const std::set<NodeId>& members, std::int64_t n,
                               bool phase1);

    Value opinion() const { return x_; }
    bool terminated() const { return terminated_; }
    std::optional<Value> output() const { return output_; }
    int created_round() const { return created_round_; }

private:
    enum Type { kInput = 0, kPrefer = 1, kStrongPrefer = 2 };

    std::map<Value, int> effective_counts(Type t, const Eval& e,
                                          const std::set<NodeId>& members,
                                          bool phase1);

    Value x_;
    int created_round_;
    bool seen_[3] = {false, false, false};
    std::optional<Value> last_sent_[3];
    bool terminated_ = false;
    std::optional<Value> output_;
};

struct PcTermination {
    std::uint64_t key = 0;
    std::optional<Value> output;  // absent when the instance resolved to bottom
    int round = 0;
};

class ParallelConsensus {
public:
    struct Step {
        std::vector<Payload> outbox;
        std::vector<PcTermination> terminations;
        std::optional<NodeId> coordinator;
    };

    // inputs: at most one pair per key, no bottom values. run_tag != 0
    // namespaces every message (rotor traffic included) for use as one
    // round-instance of the dynamic total order.
    ParallelConsensus(NodeId self,
                      const std::vector<std::pair<std::uint64_t, Value>>& inputs,
                      std::uint64_t run_tag = 0);

    std::vector<Payload> init();         // round 1
    Step step(const RoundInbox& inbox);  // rounds 2, 3, ...

    int round() const { return round_; }
    int phase() const { return round_ <= 2 ? 0 : (round_ - 3) / 5 + 1; }
    // True once the adoption window has closed and every instance terminated.
    bool resolved() const;
    std::map<std::uint64_t, Value> outputs() const;
    std::set<std::uint64_t> instance_keys() const;
    const PcInstanceCore* instance(std::uint64_t key) const;
    std::int64_t n_v() const { return frozen_ ? frozen_->n_v() : 0; }
    const std::set<NodeId>& members() const;
    std::uint64_t run_tag() const { return run_tag_; }

private:
    NodeId self_;
    std::uint64_t run_tag_;
    RotorCoordinator rotor_;
    std::optional<SenderRegistry> frozen_;
    RoundInbox rotor_buffer_;
    std::map<std::uint64_t, PcInstanceCore> instances_;
    std::map<std::uint64_t, RoundInbox> sp_stash_;  // delivered R4, processed R5
    std::optional<NodeId> phase_coordinator_;
    int round_ = 0;

    std::optional<InstanceId> rotor_tag() const;
    Payload tag_instance(Payload p, std::uint64_t key) const;
    bool matches_run(const std::optional<InstanceId>& tag) const;
};

}  // namespace idbft
