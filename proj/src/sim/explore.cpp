#include "idbft/sim/explore.hpp"

#include <algorithm>
#include <unordered_set>
#include <vector>

#include "idbft/reliable_broadcast.hpp"

namespace idbft::sim {

namespace {

const Value kBody1 = Value::of(1);
const Value kBody2 = Value::of(2);

// Per-body relay bookkeeping. age: 0 = first acceptance this round,
// 1 = deadline round, 2 = settled.
struct RelayTracker {
    std::uint32_t accepted_mask = 0;
    int age = -1;  // -1 = no acceptance yet
};

struct State {
    std::vector<RbBroadcaster> machines;            // correct nodes only
    std::vector<std::vector<Payload>> outboxes;     // in-flight broadcasts
    RelayTracker trackers[2];
    int round = 1;
};

// The per-recipient Byzantine action alphabet: payload bundles a Byzantine
// node may deliver to one correct node in one round. Bodies matter only in
// round one (the direct-reception echo rule is a round-two check).
std::vector<std::vector<Payload>> alphabet(bool sender_is_byz, NodeId sender,
                                           int round) {
    std::vector<std::vector<Payload>> out;
    out.push_back({});  // stay hidden
    out.push_back({Payload::present()});
    if (round == 1) {
        if (sender_is_byz) {
            out.push_back({Payload::body(sender, kBody1)});
            out.push_back({Payload::body(sender, kBody2)});
            out.push_back({Payload::body(sender, kBody1), Payload::body(sender, kBody2)});
        }
        return out;
    }
    out.push_back({Payload::echo_body(sender, kBody1)});
    out.push_back({Payload::echo_body(sender, kBody2)});
    out.push_back({Payload::echo_body(sender, kBody1), Payload::echo_body(sender, kBody2)});
    return out;
}

std::uint64_t encode(const State& s, const std::vector<NodeId>& byz_ids) {
    std::uint64_t key = static_cast<std::uint64_t>(s.round);
    auto push = [&key](std::uint64_t bits, int width) {
        key = (key << width) | bits;
    };
    for (const RbBroadcaster& m : s.machines) {
        std::uint64_t known = 0;
        for (std::size_t i = 0; i < byz_ids.size(); ++i) {
            if (m.registry().contains(byz_ids[i])) known |= 1u << i;
        }
        push(known, 2);
        std::uint64_t bodies = 0;
        for (const Value& b : m.bodies_seen()) {
            if (b == kBody1) bodies |= 1;
            if (b == kBody2) bodies |= 2;
        }
        push(bodies, 2);
        push((m.accepted(kBody1) ? 1u : 0u) | (m.accepted(kBody2) ? 2u : 0u), 2);
    }
    for (const auto& outbox : s.outboxes) {
        std::uint64_t bits = 0;
        for (const Payload& p : outbox) {
            if (p.kind == MsgKind::Present) bits |= 1;
            if (p.kind == MsgKind::Body) bits |= 2;
            if (p.kind == MsgKind::Echo && p.value == kBody1) bits |= 4;
            if (p.kind == MsgKind::Echo && p.value == kBody2) bits |= 8;
        }
        push(bits, 4);
    }
    for (const RelayTracker& t : s.trackers) {
        push(t.accepted_mask, 4);
        push(static_cast<std::uint64_t>(t.age + 1), 2);
    }
    return key;
}

}  // namespace

ExploreResult explore_rb(const ExploreParams& params) {
    ExploreResult result;

    int n = params.n;
    int f = params.f;
    int correct_n = n - f;
    {
        // naive schedule-tree size, saturating: alphabet of at most 5 bundles
        // per (byzantine, correct recipient) pair, per round
        auto sat_mul = [](std::uint64_t a, std::uint64_t b) {
            return (b != 0 && a > ~0ull / b) ? ~0ull : a * b;
        };
        std::uint64_t per_round = 1;
        for (int i = 0; i < std::max(1, f * correct_n); ++i) per_round = sat_mul(per_round, 5);
        std::uint64_t est = 1;
        for (int r = 1; r < params.horizon; ++r) est = sat_mul(est, per_round);
        result.estimate = est;
    }
    if (n < 2 || n > 5 || f < 1 || f >= n || correct_n > 5 || params.horizon < 3 ||
        params.horizon > 8) {
        result.refused = true;
        return result;
    }

    // Identifiers: correct nodes first, Byzantine nodes after. The designated
    // sender is node 1 when correct, otherwise the first Byzantine id.
    std::vector<NodeId> correct_ids;
    std::vector<NodeId> byz_ids;
    for (int i = 0; i < correct_n; ++i) correct_ids.push_back(NodeId{1 + (std::uint64_t)i});
    for (int i = 0; i < f; ++i) byz_ids.push_back(NodeId{100 + (std::uint64_t)i});
    NodeId sender = params.byz_sender ? byz_ids[0] : correct_ids[0];

    State initial;
    for (NodeId id : correct_ids) {
        initial.machines.emplace_back(
            id, sender, id == sender ? std::optional<Value>(kBody1) : std::nullopt);
    }
    for (RbBroadcaster& m : initial.machines) {
        initial.outboxes.push_back(m.init());
    }

    std::unordered_set<std::uint64_t> seen;
    std::vector<State> stack;
    stack.push_back(std::move(initial));
    seen.insert(encode(stack.back(), byz_ids));
    result.states = 1;

    // Pre-build per-round action alphabets and the joint index spaces.
    std::vector<std::vector<std::vector<Payload>>> alpha_by_round(
        static_cast<std::size_t>(params.horizon) + 1);
    for (int r = 1; r <= params.horizon; ++r) {
        alpha_by_round[static_cast<std::size_t>(r)] =
            alphabet(params.byz_sender, sender, r);
    }

    while (!stack.empty()) {
        State cur = std::move(stack.back());
        stack.pop_back();
        if (cur.round >= params.horizon) continue;

        const auto& alpha = alpha_by_round[static_cast<std::size_t>(cur.round)];
        int slots = f * correct_n;  // one alphabet choice per (byz, recipient)
        std::uint64_t combos = 1;
        for (int i = 0; i < slots; ++i) combos *= alpha.size();

        for (std::uint64_t combo = 0; combo < combos; ++combo) {
            if (++result.transitions > params.transition_cap) {
                result.refused = true;
                return result;
            }
            // Build next-round inboxes: correct broadcasts plus this combo's
            // Byzantine bundles. RoundInbox dedups within the round.
            std::vector<RoundInbox> inboxes(static_cast<std::size_t>(correct_n));
            for (int i = 0; i < correct_n; ++i) {
                for (int sdr = 0; sdr < correct_n; ++sdr) {
                    for (const Payload& p : cur.outboxes[static_cast<std::size_t>(sdr)]) {
                        inboxes[static_cast<std::size_t>(i)].add(correct_ids[static_cast<std::size_t>(sdr)], p);
                    }
                }
            }
            std::uint64_t rest = combo;
            for (int b = 0; b < f; ++b) {
                for (int i = 0; i < correct_n; ++i) {
                    std::uint64_t pick = rest % alpha.size();
                    rest /= alpha.size();
                    for (const Payload& p : alpha[pick]) {
                        inboxes[static_cast<std::size_t>(i)].add(byz_ids[static_cast<std::size_t>(b)], p);
                    }
                }
            }

            State next;
            next.round = cur.round + 1;
            next.machines = cur.machines;
            next.trackers[0] = cur.trackers[0];
            next.trackers[1] = cur.trackers[1];
            next.outboxes.resize(static_cast<std::size_t>(correct_n));
            bool accepted_now[2][5] = {};
            for (int i = 0; i < correct_n; ++i) {
                auto step = next.machines[static_cast<std::size_t>(i)].step(
                    inboxes[static_cast<std::size_t>(i)]);
                next.outboxes[static_cast<std::size_t>(i)] = std::move(step.outbox);
                for (const RbEvent& e : step.events) {
                    int body = e.body == kBody1 ? 0 : 1;
                    accepted_now[body][i] = true;
                    if (!params.byz_sender) {
                        if (body == 1) ++result.unforgeability_violations;
                        if (body == 0 && e.round != 3) ++result.correctness_violations;
                    }
                }
            }

            // Relay trackers and the round-3 completeness check.
            for (int body = 0; body < 2; ++body) {
                RelayTracker& t = next.trackers[body];
                bool any_new = false;
                for (int i = 0; i < correct_n; ++i) {
                    if (accepted_now[body][i]) {
                        t.accepted_mask |= 1u << i;
                        any_new = true;
                    }
                }
                std::uint32_t all_mask = (1u << correct_n) - 1;
                if (t.age == -1 && any_new) {
                    t.age = 0;
                } else if (t.age == 0) {
                    if (t.accepted_mask != all_mask) ++result.relay_violations;
                    t.age = 1;
                }
            }
            if (!params.byz_sender && next.round == 3) {
                std::uint32_t all_mask = (1u << correct_n) - 1;
                if (next.trackers[0].accepted_mask != all_mask) {
                    ++result.correctness_violations;
                }
            }

            std::uint64_t key = encode(next, byz_ids);
            if (seen.insert(key).second) {
                ++result.states;
                stack.push_back(std::move(next));
            }
        }
    }
    return result;
}

}  // namespace idbft::sim
