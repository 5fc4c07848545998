#include "idbft/sim/adversary.hpp"

#include <algorithm>

namespace idbft::sim {

namespace {

std::int64_t param_or(const Scenario& s, const std::string& key, std::int64_t fallback) {
    auto it = s.adversary_params.find(key);
    return it == s.adversary_params.end() ? fallback : it->second;
}

std::vector<NodeId> sorted(const std::set<NodeId>& ids) {
    return {ids.begin(), ids.end()};
}

// First ceil(n/2) correct ids, rotated by `offset` for seed variety.
std::set<NodeId> half_of(const std::set<NodeId>& ids, std::uint64_t offset) {
    std::vector<NodeId> v = sorted(ids);
    std::set<NodeId> out;
    std::size_t take = (v.size() + 1) / 2;
    for (std::size_t i = 0; i < take && i < v.size(); ++i) {
        out.insert(v[(i + offset) % v.size()]);
    }
    return out;
}

class SilentAdversary : public Adversary {
public:
    std::map<NodeId, std::vector<Outgoing>> act(const View&) override { return {}; }
};

// Behaves correctly (forwards the shadow outbox) until the crash round.
class CrashAtAdversary : public Adversary {
public:
    explicit CrashAtAdversary(int round) : crash_round_(round) {}
    std::map<NodeId, std::vector<Outgoing>> act(const View& view) override {
        std::map<NodeId, std::vector<Outgoing>> out;
        if (view.round >= crash_round_) return out;
        for (NodeId b : *view.byzantine) {
            auto it = view.shadow_outboxes->find(b);
            if (it != view.shadow_outboxes->end()) out[b] = it->second;
        }
        return out;
    }

private:
    int crash_round_;
};

bool value_bearing(MsgKind k) {
    switch (k) {
        case MsgKind::Body:
        case MsgKind::Echo:
        case MsgKind::Opinion:
        case MsgKind::Input:
        case MsgKind::Prefer:
        case MsgKind::StrongPrefer:
        case MsgKind::Event:
            return true;
        default:
            return false;
    }
}

// Sends the shadow's traffic with every value-bearing payload rewritten to
// v0 for one half of the correct nodes and v1 for the other.
class EquivocatorAdversary : public Adversary {
public:
    EquivocatorAdversary(Value v0, Value v1, std::uint64_t offset)
        : v0_(v0), v1_(v1), offset_(offset) {}

    std::map<NodeId, std::vector<Outgoing>> act(const View& view) override {
        std::map<NodeId, std::vector<Outgoing>> out;
        std::set<NodeId> low = half_of(*view.correct, offset_);
        for (NodeId b : *view.byzantine) {
            auto it = view.shadow_outboxes->find(b);
            if (it == view.shadow_outboxes->end()) continue;
            std::vector<Outgoing>& sends = out[b];
            for (const Outgoing& o : it->second) {
                if (!value_bearing(o.payload.kind) || o.payload.value.is_bottom()) {
                    sends.push_back(o);
                    continue;
                }
                for (NodeId r : *view.correct) {
                    Outgoing split = o;
                    split.to = r;
                    split.payload.value = low.count(r) ? v0_ : v1_;
                    sends.push_back(split);
                }
                // other Byzantine nodes see v0
                for (NodeId r : *view.byzantine) {
                    Outgoing split = o;
                    split.to = r;
                    split.payload.value = v0_;
                    sends.push_back(split);
                }
            }
        }
        return out;
    }

private:
    Value v0_, v1_;
    std::uint64_t offset_;
};

// Claims to have received messages from nodes that never sent them: forged
// body echoes against the designated sender, or echoes of a ghost identifier.
class EchoForgerAdversary : public Adversary {
public:
    EchoForgerAdversary(std::optional<NodeId> rb_sender, Value forged, NodeId ghost,
                        std::uint64_t seed)
        : rb_sender_(rb_sender), forged_(forged), ghost_(ghost), rng_(seed) {}

    std::map<NodeId, std::vector<Outgoing>> act(const View& view) override {
        std::map<NodeId, std::vector<Outgoing>> out;
        for (NodeId b : *view.byzantine) {
            auto it = view.shadow_outboxes->find(b);
            std::vector<Outgoing>& sends = out[b];
            if (it != view.shadow_outboxes->end()) sends = it->second;
            Payload forged = rb_sender_ ? Payload::echo_body(*rb_sender_, forged_)
                                        : Payload::echo_id(ghost_);
            if (rng_() % 2 == 0) {
                sends.push_back(Outgoing{std::nullopt, forged});
            } else {
                for (NodeId r : half_of(*view.correct, rng_() % 7)) {
                    sends.push_back(Outgoing{r, forged});
                }
            }
        }
        return out;
    }

private:
    std::optional<NodeId> rb_sender_;
    Value forged_;
    NodeId ghost_;
    std::mt19937_64 rng_;
};

// Announces itself (and keeps talking) to a strict subset only, skewing n_v.
class PartialPresenceAdversary : public Adversary {
public:
    explicit PartialPresenceAdversary(std::uint64_t offset) : offset_(offset) {}
    std::map<NodeId, std::vector<Outgoing>> act(const View& view) override {
        std::map<NodeId, std::vector<Outgoing>> out;
        std::set<NodeId> visible = half_of(*view.correct, offset_);
        for (NodeId b : *view.byzantine) {
            auto it = view.shadow_outboxes->find(b);
            if (it == view.shadow_outboxes->end()) continue;
            std::vector<Outgoing>& sends = out[b];
            for (const Outgoing& o : it->second) {
                if (o.to) {
                    if (visible.count(*o.to)) sends.push_back(o);
                    continue;
                }
                for (NodeId r : visible) sends.push_back(Outgoing{r, o.payload});
            }
        }
        return out;
    }

private:
    std::uint64_t offset_;
};

// Coordinator equivocation: opinions split per recipient, plus occasional
// spurious opinions when the shadow is not the coordinator.
class OpinionSplitterAdversary : public Adversary {
public:
    OpinionSplitterAdversary(Value v0, Value v1, std::uint64_t seed)
        : v0_(v0), v1_(v1), rng_(seed) {}

    std::map<NodeId, std::vector<Outgoing>> act(const View& view) override {
        std::map<NodeId, std::vector<Outgoing>> out;
        std::set<NodeId> low = half_of(*view.correct, rng_() % 5);
        for (NodeId b : *view.byzantine) {
            auto it = view.shadow_outboxes->find(b);
            std::vector<Outgoing>& sends = out[b];
            bool had_opinion = false;
            if (it != view.shadow_outboxes->end()) {
                for (const Outgoing& o : it->second) {
                    if (o.payload.kind == MsgKind::Opinion) {
                        had_opinion = true;
                        for (NodeId r : *view.correct) {
                            Outgoing split = o;
                            split.to = r;
                            split.payload.value = low.count(r) ? v0_ : v1_;
                            sends.push_back(split);
                        }
                    } else {
                        sends.push_back(o);
                    }
                }
            }
            if (!had_opinion && rng_() % 3 == 0) {
                for (NodeId r : *view.correct) {
                    sends.push_back(
                        Outgoing{r, Payload::opinion(low.count(r) ? v0_ : v1_)});
                }
            }
        }
        return out;
    }

private:
    Value v0_, v1_;
    std::mt19937_64 rng_;
};

// Injects messages of a never-input instance id at a chosen adoption anchor
// of parallel consensus. anchor: 2, 3, 5 = first-phase rounds R2/R3/R5;
// 7 = second-phase injection (must be discarded).
class FakeInstanceAdversary : public Adversary {
public:
    FakeInstanceAdversary(int anchor, std::uint64_t key, Value value, bool subset,
                          std::uint64_t seed)
        : anchor_(anchor), key_(key), value_(value), subset_(subset), rng_(seed) {}

    std::map<NodeId, std::vector<Outgoing>> act(const View& view) override {
        std::map<NodeId, std::vector<Outgoing>> out;
        int send_round = 0;
        Payload p;
        switch (anchor_) {
            case 2: send_round = 3; p = Payload::input(value_); break;
            case 3: send_round = 4; p = Payload::prefer(value_); break;
            case 5: send_round = 5; p = Payload::strong_prefer(value_); break;
            default: send_round = 8; p = Payload::input(value_); break;  // phase 2
        }
        p.instance = InstanceId{0, key_};
        for (NodeId b : *view.byzantine) {
            auto it = view.shadow_outboxes->find(b);
            std::vector<Outgoing>& sends = out[b];
            if (it != view.shadow_outboxes->end()) sends = it->second;
            if (view.round == send_round) {
                if (subset_) {
                    for (NodeId r : half_of(*view.correct, rng_() % 3)) {
                        sends.push_back(Outgoing{r, p});
                    }
                } else {
                    sends.push_back(Outgoing{std::nullopt, p});
                }
            }
        }
        return out;
    }

private:
    int anchor_;
    std::uint64_t key_;
    Value value_;
    bool subset_;
    std::mt19937_64 rng_;
};

// Tells half the nodes it is leaving while continuing to participate.
class ChurnLiarAdversary : public Adversary {
public:
    ChurnLiarAdversary(int round, std::uint64_t offset)
        : lie_round_(round), offset_(offset) {}

    std::map<NodeId, std::vector<Outgoing>> act(const View& view) override {
        std::map<NodeId, std::vector<Outgoing>> out;
        for (NodeId b : *view.byzantine) {
            auto it = view.shadow_outboxes->find(b);
            std::vector<Outgoing>& sends = out[b];
            if (it != view.shadow_outboxes->end()) sends = it->second;
            if (view.round == lie_round_) {
                for (NodeId r : half_of(*view.correct, offset_)) {
                    sends.push_back(Outgoing{r, Payload::absent()});
                }
            }
        }
        return out;
    }

private:
    int lie_round_;
    std::uint64_t offset_;
};

// Seeded chaos: forwards or drops shadow traffic per recipient and injects
// random protocol-shaped payloads.
class RandomAdversary : public Adversary {
public:
    RandomAdversary(const Scenario& scenario, std::uint64_t seed)
        : rng_(seed), protocol_(scenario.protocol) {
        for (const auto& n : scenario.nodes) {
            ids_.push_back(n.id);
            if (n.input && scenario.protocol == Protocol::Rb) rb_sender_ = n.id;
            for (const auto& [key, value] : n.pairs) keys_.push_back(key);
        }
        std::sort(keys_.begin(), keys_.end());
        keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
    }

    std::map<NodeId, std::vector<Outgoing>> act(const View& view) override {
        std::map<NodeId, std::vector<Outgoing>> out;
        for (NodeId b : *view.byzantine) {
            std::vector<Outgoing>& sends = out[b];
            auto it = view.shadow_outboxes->find(b);
            if (it != view.shadow_outboxes->end()) {
                for (const Outgoing& o : it->second) {
                    // per-recipient withholding of own honest traffic
                    if (o.to) {
                        if (rng_() % 4 != 0) sends.push_back(o);
                        continue;
                    }
                    for (NodeId r : *view.correct) {
                        if (rng_() % 4 != 0) sends.push_back(Outgoing{r, o.payload});
                    }
                }
            }
            for (NodeId r : *view.correct) {
                if (rng_() % 3 != 0) continue;
                sends.push_back(Outgoing{r, random_payload(view.round)});
            }
        }
        return out;
    }

private:
    Value rand_value() {
        static const std::int64_t pool[] = {0, 1, 2, 7, 42, -5, 1000000};
        return Value::of(pool[rng_() % 7]);
    }

    Payload random_payload(int round) {
        switch (protocol_) {
            case Protocol::Rb: {
                Value v = rng_() % 2 ? rand_value() : Value::of(1);
                if (rb_sender_ && rng_() % 2 == 0) {
                    return round <= 1 ? Payload::body(*rb_sender_, v)
                                      : Payload::echo_body(*rb_sender_, v);
                }
                return Payload::present();
            }
            case Protocol::Rotor: {
                switch (rng_() % 3) {
                    case 0: return Payload::echo_id(ids_[rng_() % ids_.size()]);
                    case 1: return Payload::opinion(rand_value());
                    default: return Payload::init();
                }
            }
            case Protocol::Approx:
                return Payload::input(rand_value());
            case Protocol::Parallel: {
                Payload p = random_phase_payload();
                std::uint64_t key =
                    (!keys_.empty() && rng_() % 3 != 0) ? keys_[rng_() % keys_.size()]
                                                        : 991 + rng_() % 3;
                p.instance = InstanceId{0, key};
                return p;
            }
            default: {
                if (rng_() % 4 == 0) return Payload::opinion(rand_value());
                if (rng_() % 5 == 0) return Payload::echo_id(ids_[rng_() % ids_.size()]);
                return random_phase_payload();
            }
        }
    }

    Payload random_phase_payload() {
        Value v = rng_() % 3 == 0 ? rand_value() : Value::of(rng_() % 2);
        switch (rng_() % 3) {
            case 0: return Payload::input(v);
            case 1: return Payload::prefer(v);
            default: return Payload::strong_prefer(v);
        }
    }

    std::mt19937_64 rng_;
    Protocol protocol_;
    std::vector<NodeId> ids_;
    std::vector<std::uint64_t> keys_;
    std::optional<NodeId> rb_sender_;
};

}  // namespace

const std::vector<std::string>& adversary_catalog() {
    static const std::vector<std::string> catalog = {
        "silent",           "crash_at",          "equivocator",
        "echo_forger",      "partial_presence",  "opinion_splitter",
        "fake_instance_injector", "churn_liar",  "random",
    };
    return catalog;
}

std::unique_ptr<Adversary> make_adversary(const Scenario& s) {
    std::uint64_t seed = s.seed ^ 0x9e3779b97f4a7c15ull;
    std::optional<NodeId> rb_sender;
    if (s.protocol == Protocol::Rb) {
        for (const auto& n : s.nodes) {
            if (n.input) rb_sender = n.id;
        }
    }
    const std::string& name = s.adversary;
    if (name == "silent") return std::make_unique<SilentAdversary>();
    if (name == "crash_at") {
        return std::make_unique<CrashAtAdversary>(
            static_cast<int>(param_or(s, "round", 4)));
    }
    if (name == "equivocator") {
        return std::make_unique<EquivocatorAdversary>(
            Value::of(param_or(s, "v0", 0)), Value::of(param_or(s, "v1", 1)),
            seed % 5);
    }
    if (name == "echo_forger") {
        return std::make_unique<EchoForgerAdversary>(
            rb_sender, Value::of(param_or(s, "value", 404)),
            NodeId{static_cast<std::uint64_t>(param_or(s, "ghost", 424242))}, seed);
    }
    if (name == "partial_presence") {
        return std::make_unique<PartialPresenceAdversary>(seed % 7);
    }
    if (name == "opinion_splitter") {
        return std::make_unique<OpinionSplitterAdversary>(
            Value::of(param_or(s, "v0", 0)), Value::of(param_or(s, "v1", 1)), seed);
    }
    if (name == "fake_instance_injector") {
        return std::make_unique<FakeInstanceAdversary>(
            static_cast<int>(param_or(s, "anchor", 2)),
            static_cast<std::uint64_t>(param_or(s, "fake_key", 999)),
            Value::of(param_or(s, "value", 5)), param_or(s, "subset", 0) != 0, seed);
    }
    if (name == "churn_liar") {
        return std::make_unique<ChurnLiarAdversary>(
            static_cast<int>(param_or(s, "round", 10)), seed % 5);
    }
    if (name == "random") return std::make_unique<RandomAdversary>(s, seed);
    throw ScenarioError("unknown adversary strategy: " + name);
}

}  // namespace idbft::sim
