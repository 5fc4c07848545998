#include "idbft/parallel_consensus.hpp"

#include "idbft/consensus.hpp"
#include "idbft/thresholds.hpp"

namespace idbft {

std::optional<Value> PcInstanceCore::input_send() {
    if (terminated_ || x_.is_bottom()) return std::nullopt;
    last_sent_[kInput] = x_;
    return x_;
}

std::map<Value, int> PcInstanceCore::effective_counts(Type t, const Eval& e,
                                                      const std::set<NodeId>& members,
                                                      bool phase1) {
    std::map<Value, int> counts = e.counts;
    if (!seen_[t]) {
        if (e.any_typed) {
            seen_[t] = true;
            // First receipt: fill m(bottom) for every registered node that
            // sent neither the type nor its marker. Fills are a first-phase
            // join mechanism only.
            if (phase1) {
                for (NodeId m : members) {
                    if (!e.blockers.count(m)) ++counts[Value::bottom()];
                }
            }
        }
        return counts;
    }
    // Already participating: a silent registered node is assumed to have
    // repeated this node's own most recent message of the same type.
    if (last_sent_[t]) {
        for (NodeId m : members) {
            if (!e.blockers.count(m)) ++counts[*last_sent_[t]];
        }
    }
    return counts;
}

Payload PcInstanceCore::eval_input(const Eval& e, const std::set<NodeId>& members,
                                   std::int64_t n, bool phase1) {
    auto counts = effective_counts(kInput, e, members, phase1);
    if (auto x = best_quorum_value(counts, n, ge_two_thirds)) {
        last_sent_[kPrefer] = *x;
        return Payload::prefer(*x);
    }
    return Payload::no_preference();
}

Payload PcInstanceCore::eval_prefer(const Eval& e, const std::set<NodeId>& members,
                                    std::int64_t n, bool phase1) {
    auto counts = effective_counts(kPrefer, e, members, phase1);
    if (auto x = best_quorum_value(counts, n, ge_one_third)) {
        x_ = *x;
    }
    if (auto x = best_quorum_value(counts, n, ge_two_thirds)) {
        last_sent_[kStrongPrefer] = *x;
        return Payload::strong_prefer(*x);
    }
    return Payload::no_strong_preference();
}

PcInstanceCore::Decision PcInstanceCore::eval_strongprefer(
    const Eval& e, std::optional<Value> c, const std::set<NodeId>& members,
    std::int64_t n, bool phase1) {
    auto counts = effective_counts(kStrongPrefer, e, members, phase1);
    Decision d;
    bool any_one_third = best_quorum_value(counts, n, ge_one_third).has_value();
    if (!any_one_third && c) {
        x_ = *c;
    }
    if (auto x = best_quorum_value(counts, n, ge_two_thirds)) {
        terminated_ = true;
        d.terminated_now = true;
        if (!x->is_bottom()) {
            output_ = *x;
            d.output = *x;
        }
    }
    return d;
}

ParallelConsensus::ParallelConsensus(
    NodeId self, const std::vector<std::pair<std::uint64_t, Value>>& inputs,
    std::uint64_t run_tag)
    : self_(self), run_tag_(run_tag), rotor_(self) {
    for (const auto& [key, value] : inputs) {
        if (value.is_bottom()) {
            throw ProtocolError("parallel: bottom is not an admissible input");
        }
        if (key == kRotorInstanceKey) {
            throw ProtocolError("parallel: reserved instance key");
        }
        if (!instances_.try_emplace(key, PcInstanceCore(value, 1)).second) {
            throw ProtocolError("parallel: duplicate instance id in inputs");
        }
    }
}

std::optional<InstanceId> ParallelConsensus::rotor_tag() const {
    if (run_tag_ == 0) return std::nullopt;
    return InstanceId{run_tag_, kRotorInstanceKey};
}

Payload ParallelConsensus::tag_instance(Payload p, std::uint64_t key) const {
    p.instance = InstanceId{run_tag_, key};
    return p;
}

bool ParallelConsensus::matches_run(const std::optional<InstanceId>& tag) const {
    return tag && tag->run == run_tag_ && tag->key != kRotorInstanceKey;
}

const std::set<NodeId>& ParallelConsensus::members() const {
    if (!frozen_) throw ProtocolError("parallel: registry not frozen yet");
    return frozen_->members();
}

std::vector<Payload> ParallelConsensus::init() {
    if (round_ != 0) throw ProtocolError("parallel: init called twice");
    round_ = 1;
    std::vector<Payload> out = rotor_.init();
    if (auto tag = rotor_tag()) {
        for (Payload& p : out) p.instance = *tag;
    }
    return out;
}

bool ParallelConsensus::resolved() const {
    if (round_ < 7) return false;  // adoption window still open
    for (const auto& [key, inst] : instances_) {
        if (!inst.terminated()) return false;
    }
    return true;
}

std::map<std::uint64_t, Value> ParallelConsensus::outputs() const {
    std::map<std::uint64_t, Value> out;
    for (const auto& [key, inst] : instances_) {
        if (inst.output()) out[key] = *inst.output();
    }
    return out;
}

std::set<std::uint64_t> ParallelConsensus::instance_keys() const {
    std::set<std::uint64_t> out;
    for (const auto& [key, inst] : instances_) out.insert(key);
    return out;
}

const PcInstanceCore* ParallelConsensus::instance(std::uint64_t key) const {
    auto it = instances_.find(key);
    return it == instances_.end() ? nullptr : &it->second;
}

ParallelConsensus::Step ParallelConsensus::step(const RoundInbox& inbox) {
    if (round_ < 1) throw ProtocolError("parallel: step before init");
    ++round_;

    Step out;

    // Strip run namespacing from rotor traffic before handing it on.
    auto rotor_view = [&](const RoundInbox& src) {
        RoundInbox view = src.filtered([&](NodeId, const Payload& p) {
            if (run_tag_ == 0) {
                return !p.instance &&
                       (p.kind == MsgKind::Init || p.kind == MsgKind::Echo ||
                        p.kind == MsgKind::Opinion);
            }
            return p.instance && p.instance->run == run_tag_ &&
                   p.instance->key == kRotorInstanceKey;
        });
        if (run_tag_ == 0) return view;
        RoundInbox stripped;
        view.for_each([&](NodeId sender, const Payload& p) {
            Payload q = p;
            q.instance.reset();
            stripped.add(sender, q);
        });
        return stripped;
    };

    if (round_ == 2) {
        frozen_ = SenderRegistry::frozen_from(inbox.senders());
        auto rotor_step = rotor_.step(rotor_view(inbox), std::nullopt);
        out.outbox = std::move(rotor_step.outbox);
        if (auto tag = rotor_tag()) {
            for (Payload& p : out.outbox) p.instance = *tag;
        }
        return out;
    }

    RoundInbox filtered = frozen_->filter(inbox);
    rotor_buffer_.merge(rotor_view(filtered));
    std::int64_t n = frozen_->n_v();
    bool phase1 = phase() == 1;
    int sub = (round_ - 3) % 5 + 1;

    // Slice this round's instance traffic of one kind per key.
    auto slice = [&](std::uint64_t key, MsgKind kind, MsgKind marker,
                     PcInstanceCore::Eval& e) {
        filtered.for_each([&](NodeId sender, const Payload& p) {
            if (!matches_run(p.instance) || p.instance->key != key) return;
            if (p.kind == kind) {
                ++e.counts[p.value];
                e.any_typed = true;
                e.blockers.insert(sender);
            } else if (p.kind == marker) {
                e.blockers.insert(sender);
            }
        });
    };

    auto adopt_new = [&](MsgKind kind) {
        if (!phase1) return;  // discarded: never creates an instance later
        filtered.for_each([&](NodeId, const Payload& p) {
            if (p.kind != kind || !matches_run(p.instance)) return;
            std::uint64_t key = p.instance->key;
            if (!instances_.count(key)) {
                instances_.emplace(key, PcInstanceCore(Value::bottom(), round_));
            }
        });
    };

    switch (sub) {
        case 1: {
            for (auto& [key, inst] : instances_) {
                if (auto x = inst.input_send()) {
                    out.outbox.push_back(tag_instance(Payload::input(*x), key));
                }
            }
            break;
        }
        case 2: {
            adopt_new(MsgKind::Input);
            for (auto& [key, inst] : instances_) {
                if (inst.terminated()) continue;
                PcInstanceCore::Eval e;
                slice(key, MsgKind::Input, MsgKind::NoPreference, e);
                // No marker exists for input; only actual senders block.
                Payload send = inst.eval_input(e, frozen_->members(), n, phase1);
                out.outbox.push_back(tag_instance(send, key));
            }
            break;
        }
        case 3: {
            adopt_new(MsgKind::Prefer);
            for (auto& [key, inst] : instances_) {
                if (inst.terminated()) continue;
                PcInstanceCore::Eval e;
                slice(key, MsgKind::Prefer, MsgKind::NoPreference, e);
                Payload send = inst.eval_prefer(e, frozen_->members(), n, phase1);
                out.outbox.push_back(tag_instance(send, key));
            }
            break;
        }
        case 4: {
            // Stash strongprefer traffic (unknown keys included; they may be
            // adopted in the decide round), then run the shared rotor round.
            filtered.for_each([&](NodeId sender, const Payload& p) {
                if (!matches_run(p.instance)) return;
                if (p.kind == MsgKind::StrongPrefer ||
                    p.kind == MsgKind::NoStrongPreference) {
                    sp_stash_[p.instance->key].add(sender, p);
                }
            });
            phase_coordinator_.reset();
            if (!rotor_.terminated()) {
                auto rotor_step = rotor_.step(rotor_buffer_, std::nullopt);
                rotor_buffer_ = RoundInbox{};
                if (auto tag = rotor_tag()) {
                    for (Payload& p : rotor_step.outbox) p.instance = *tag;
                }
                out.outbox = std::move(rotor_step.outbox);
                out.coordinator = rotor_step.selected;
                phase_coordinator_ = rotor_step.selected;
                if (rotor_step.selected == self_) {
                    for (auto& [key, inst] : instances_) {
                        if (!inst.terminated()) {
                            out.outbox.push_back(
                                tag_instance(Payload::opinion(inst.opinion()), key));
                        }
                    }
                }
            }
            break;
        }
        case 5: {
            if (phase1) {
                for (const auto& [key, stash] : sp_stash_) {
                    bool any_sp = false;
                    stash.for_each([&](NodeId, const Payload& p) {
                        if (p.kind == MsgKind::StrongPrefer) any_sp = true;
                    });
                    if (any_sp && !instances_.count(key)) {
                        instances_.emplace(key, PcInstanceCore(Value::bottom(), round_));
                    }
                }
            }
            for (auto& [key, inst] : instances_) {
                if (inst.terminated()) continue;
                PcInstanceCore::Eval e;
                auto it = sp_stash_.find(key);
                if (it != sp_stash_.end()) {
                    it->second.for_each([&](NodeId sender, const Payload& p) {
                        if (p.kind == MsgKind::StrongPrefer) {
                            ++e.counts[p.value];
                            e.any_typed = true;
                            e.blockers.insert(sender);
                        } else if (p.kind == MsgKind::NoStrongPreference) {
                            e.blockers.insert(sender);
                        }
                    });
                }
                std::optional<Value> c;
                if (phase_coordinator_) {
                    if (const auto* list = filtered.from(*phase_coordinator_)) {
                        for (const Payload& p : *list) {
                            if (p.kind == MsgKind::Opinion && matches_run(p.instance) &&
                                p.instance->key == key) {
                                if (!c || p.value < *c) c = p.value;
                            }
                        }
                    }
                }
                auto d = inst.eval_strongprefer(e, c, frozen_->members(), n, phase1);
                if (d.terminated_now) {
                    out.terminations.push_back(PcTermination{key, d.output, round_});
                }
            }
            sp_stash_.clear();
            break;
        }
    }
    return out;
}

}  // namespace idbft
