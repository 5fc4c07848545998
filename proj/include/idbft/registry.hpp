// The n_v bookkeeping: which senders this node has heard from. Growing mode
// accumulates forever (Algs 1-2); frozen mode is fixed at initialization and
// drops later envelopes from non-members (Algs 3 and 5).

#pragma once

#include <set>
#include <utility>

#include "idbft/inbox.hpp"
#include "idbft/types.hpp"

namespace idbft {

class SenderRegistry {
public:
    enum class Mode { Growing, Frozen };

    static SenderRegistry growing() { return SenderRegistry(Mode::Growing, {}); }
    static SenderRegistry frozen_from(std::set<NodeId> members) {
        return SenderRegistry(Mode::Frozen, std::move(members));
    }

    Mode mode() const { return mode_; }
    std::int64_t n_v() const { return static_cast<std::int64_t>(members_.size()); }
    bool contains(NodeId id) const { return members_.count(id) > 0; }
    const std::set<NodeId>& members() const { return members_; }

    // Growing: add this round's senders. Frozen: no-op.
    void absorb(const RoundInbox& inbox) {
        if (mode_ != Mode::Growing) return;
        for (NodeId s : inbox.senders()) members_.insert(s);
    }

    // Frozen: drop envelopes from non-members. Growing: identity.
    RoundInbox filter(const RoundInbox& inbox) const {
        if (mode_ == Mode::Growing) return inbox;
        return inbox.filtered([this](NodeId sender, const Payload&) {
            return members_.count(sender) > 0;
        });
    }

private:
    SenderRegistry(Mode mode, std::set<NodeId> members)
        : mode_(mode), members_(std::move(members)) {}

    Mode mode_;
    std::set<NodeId> members_;
};

// One round of registry upkeep: the updated registry plus the inbox view the
// protocol should act on (filtered under frozen mode).
inline std::pair<SenderRegistry, RoundInbox> absorb_round(SenderRegistry registry,
                                                          const RoundInbox& inbox) {
    registry.absorb(inbox);
    return {registry, registry.filter(inbox)};
}

}  // namespace idbft
