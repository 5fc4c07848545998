// Reliable broadcast of a message (m,s) from a designated sender s. The
// machine tracks every body observed for s, because a Byzantine s may start
// several (m,s) instances; each body runs the echo/accept logic on its own.

#pragma once

#include <map>
#include <optional>
#include <vector>

#include "idbft/inbox.hpp"
#include "idbft/registry.hpp"
#include "idbft/types.hpp"

namespace idbft {

struct RbEvent {
    Value body{};
    NodeId sender{};
    int round = 0;
};

class RbBroadcaster {
public:
    struct Step {
        std::vector<Payload> outbox;  // broadcast to all, including self
        std::vector<RbEvent> events;
    };

    // body_if_sender must be present exactly when self == sender.
    RbBroadcaster(NodeId self, NodeId sender, std::optional<Value> body_if_sender);

    // Round 1: the sender broadcasts (m,s), everyone else broadcasts present.
    std::vector<Payload> init();

    // Rounds 2, 3, ... in order. Round 2 echoes a directly received (m,s);
    // rounds >= 3 run the per-round threshold loop.
    Step step(const RoundInbox& inbox);

    int round() const { return round_; }
    std::int64_t n_v() const { return registry_.n_v(); }
    const SenderRegistry& registry() const { return registry_; }
    bool accepted(const Value& body) const;
    std::optional<int> accepted_round(const Value& body) const;
    std::vector<Value> bodies_seen() const;

private:
    struct PerBody {
        bool accepted = false;
        int accepted_round = -1;
    };

    NodeId self_;
    NodeId sender_;
    std::optional<Value> own_body_;
    SenderRegistry registry_ = SenderRegistry::growing();
    std::map<Value, PerBody> bodies_;
    int round_ = 0;  // last completed round
};

}  // namespace idbft
