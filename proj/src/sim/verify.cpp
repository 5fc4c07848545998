#include <algorithm>

#include "idbft/parallel_consensus.hpp"
#include "idbft/sim/engine.hpp"
#include "idbft/thresholds.hpp"

namespace idbft::sim {

namespace {

std::string node_witness(NodeId id, const std::string& what) {
    return "node " + to_string(id) + ": " + what;
}

// --------------------------------------------------------------- reliable broadcast

// Echo counts and n_v per correct node are recomputed from the delivery log,
// independently of the state machines that produced the run.
struct RbView {
    // per node, per round: distinct senders of echo(m,s) per body
    std::map<NodeId, std::map<int, std::map<Value, std::set<NodeId>>>> echoes;
    std::map<NodeId, std::map<int, std::int64_t>> n_v;  // cumulative senders
};

RbView rebuild_rb_view(const GroundTruth& truth, NodeId sender) {
    RbView view;
    std::map<NodeId, std::set<NodeId>> seen;
    std::map<NodeId, int> last_round;
    for (const Delivery& d : truth.deliveries) {
        if (!truth.correct.count(d.to)) continue;
        seen[d.to].insert(d.from);
        // record n_v at every round boundary up to this delivery
        view.n_v[d.to][d.round] =
            static_cast<std::int64_t>(seen[d.to].size());
        if (d.payload.kind == MsgKind::Echo && d.payload.origin == sender &&
            !d.payload.instance && !d.payload.value.is_bottom()) {
            view.echoes[d.to][d.round][d.payload.value].insert(d.from);
        }
    }
    // forward-fill n_v for rounds without deliveries
    for (auto& [node, per_round] : view.n_v) {
        std::int64_t last = 0;
        for (int r = 2; r <= truth.rounds_executed; ++r) {
            auto it = per_round.find(r);
            if (it == per_round.end()) {
                per_round[r] = last;
            } else {
                last = it->second;
            }
        }
    }
    return view;
}

Verdict verify_rb(const Scenario&, const GroundTruth& truth) {
    const auto& rb = std::get<RbTruth>(truth.detail);
    Verdict v;
    PropertyResult correctness{"rb.correctness"};
    PropertyResult unforgeability{"rb.unforgeability"};
    PropertyResult relay{"rb.relay"};
    PropertyResult one_third{"rb.one_third_support"};
    PropertyResult two_thirds{"rb.two_thirds_support"};

    bool sender_correct = truth.correct.count(rb.sender) > 0;

    if (sender_correct) {
        for (NodeId node : truth.correct) {
            auto it = rb.accept_round.find(node);
            const Value& body = *rb.designated_body;
            if (it == rb.accept_round.end() || !it->second.count(body)) {
                correctness.fail(truth.rounds_executed,
                                 node_witness(node, "never accepted the body"));
            } else if (it->second.at(body) != 3) {
                correctness.fail(it->second.at(body),
                                 node_witness(node, "accepted at round " +
                                                        std::to_string(it->second.at(body))));
            }
        }
        for (const auto& [node, per_body] : rb.accept_round) {
            for (const auto& [body, round] : per_body) {
                if (body != *rb.designated_body) {
                    unforgeability.fail(
                        round, node_witness(node, "accepted forged body " + to_string(body)));
                }
            }
        }
    }

    // Relay: per body, all correct acceptances within one round of the first.
    std::map<Value, int> first_accept;
    for (const auto& [node, per_body] : rb.accept_round) {
        for (const auto& [body, round] : per_body) {
            auto it = first_accept.find(body);
            if (it == first_accept.end() || round < it->second) first_accept[body] = round;
        }
    }
    for (const auto& [body, first] : first_accept) {
        for (NodeId node : truth.correct) {
            auto it = rb.accept_round.find(node);
            bool ok = it != rb.accept_round.end() && it->second.count(body) &&
                      it->second.at(body) <= first + 1;
            if (!ok) {
                relay.fail(first + 1,
                           node_witness(node, "did not accept " + to_string(body) +
                                                  " by round " + std::to_string(first + 1)));
            }
        }
    }

    // Quorum support facts, recomputed from the raw delivery log.
    RbView view = rebuild_rb_view(truth, rb.sender);
    for (NodeId node : truth.correct) {
        auto echoes_it = view.echoes.find(node);
        if (echoes_it == view.echoes.end()) continue;
        for (const auto& [round, per_body] : echoes_it->second) {
            if (round < 3) continue;
            std::int64_t n = view.n_v[node][round];
            if (n < 1) continue;
            for (const auto& [body, senders] : per_body) {
                auto count = static_cast<std::int64_t>(senders.size());
                if (ge_one_third(count, n)) {
                    bool has_correct = false;
                    for (NodeId from : senders) {
                        if (truth.correct.count(from)) has_correct = true;
                    }
                    if (!has_correct) {
                        one_third.fail(round,
                                       node_witness(node, "one-third echo quorum for " +
                                                              to_string(body) +
                                                              " with no correct sender"));
                    }
                }
                if (ge_two_thirds(count, n)) {
                    for (NodeId peer : truth.correct) {
                        std::int64_t peer_n = view.n_v[peer][round];
                        std::int64_t peer_count = 0;
                        auto pit = view.echoes.find(peer);
                        if (pit != view.echoes.end()) {
                            auto rit = pit->second.find(round);
                            if (rit != pit->second.end() && rit->second.count(body)) {
                                peer_count = static_cast<std::int64_t>(
                                    rit->second.at(body).size());
                            }
                        }
                        if (peer_n < 1 || !ge_one_third(peer_count, peer_n)) {
                            two_thirds.fail(
                                round, node_witness(peer, "lacked one-third of " +
                                                              to_string(body) +
                                                              " despite a two-thirds quorum"));
                        }
                    }
                }
            }
        }
    }

    v.properties = {correctness, unforgeability, relay, one_third, two_thirds};
    for (const auto& [node, per_body] : rb.accept_round) {
        for (const auto& [body, round] : per_body) {
            v.metrics.termination_round[node] =
                std::max<std::int64_t>(v.metrics.termination_round[node], round);
        }
    }
    return v;
}

// --------------------------------------------------------------- rotor

Verdict verify_rotor(const Scenario& s, const GroundTruth& truth) {
    const auto& rt = std::get<RotorTruth>(truth.detail);
    Verdict v;
    PropertyResult candidate_relay{"rotor.candidate_relay"};
    PropertyResult good_round{"rotor.good_round"};
    PropertyResult termination{"rotor.termination_bound"};
    PropertyResult correct_first{"rotor.correct_ids_first"};

    std::int64_t n = static_cast<std::int64_t>(s.nodes.size());

    // Termination within n+1 iterations for every correct node.
    std::int64_t max_iterations = 0;
    for (NodeId node : truth.correct) {
        auto it = rt.termination_iteration.find(node);
        if (it == rt.termination_iteration.end()) {
            termination.fail(truth.rounds_executed,
                             node_witness(node, "did not terminate"));
            continue;
        }
        std::int64_t iters = it->second + 1;
        max_iterations = std::max(max_iterations, iters);
        if (iters > n + 1) {
            termination.fail(truth.rounds_executed,
                             node_witness(node, std::to_string(iters) + " iterations"));
        }
    }
    v.metrics.extra["max_iterations"] = max_iterations;

    // Candidate relay: an insertion at iteration k propagates by k+1 to every
    // correct node still running then.
    auto last_iteration = [&](NodeId node) {
        auto it = rt.selections.find(node);
        return it == rt.selections.end() ? -1
                                         : static_cast<int>(it->second.size()) - 1;
    };
    auto insert_iteration = [&](NodeId node, NodeId p) -> std::optional<int> {
        auto it = rt.insertions.find(node);
        if (it == rt.insertions.end()) return std::nullopt;
        for (const auto& [iter, q] : it->second) {
            if (q == p) return iter;
        }
        return std::nullopt;
    };
    for (NodeId node : truth.correct) {
        auto it = rt.insertions.find(node);
        if (it == rt.insertions.end()) continue;
        for (const auto& [iter, p] : it->second) {
            for (NodeId peer : truth.correct) {
                if (last_iteration(peer) < iter + 1) continue;  // stopped earlier
                auto peer_iter = insert_iteration(peer, p);
                if (!peer_iter || *peer_iter > iter + 1) {
                    candidate_relay.fail(
                        iter + 1,
                        node_witness(peer, "missed candidate " + to_string(p) +
                                               " inserted at iteration " +
                                               std::to_string(iter)));
                }
            }
        }
    }

    // Good round: some iteration where all correct nodes selected the same
    // correct coordinator and all accepted its opinion next iteration.
    bool found = false;
    int max_common = 0;
    for (NodeId node : truth.correct) {
        max_common = std::max(max_common, last_iteration(node));
    }
    for (int k = 0; !found && k <= max_common; ++k) {
        std::optional<NodeId> common;
        bool all_have = true;
        for (NodeId node : truth.correct) {
            auto it = rt.selections.find(node);
            if (it == rt.selections.end() ||
                static_cast<int>(it->second.size()) <= k) {
                all_have = false;
                break;
            }
            NodeId p = it->second[k];
            if (!common) {
                common = p;
            } else if (*common != p) {
                all_have = false;
                break;
            }
        }
        if (!all_have || !common || !truth.correct.count(*common)) continue;
        Value expect = rt.opinions.at(*common);
        bool everyone = true;
        for (NodeId node : truth.correct) {
            bool got = false;
            auto it = rt.events.find(node);
            if (it != rt.events.end()) {
                for (const RotorEvent& e : it->second) {
                    if (e.kind == RotorEvent::Kind::OpinionAccepted &&
                        e.iteration == k + 1 && e.from == *common &&
                        e.value == expect) {
                        got = true;
                    }
                }
            }
            if (!got) everyone = false;
        }
        if (everyone) found = true;
    }
    if (!found) {
        good_round.fail(truth.rounds_executed, "no common correct coordinator round");
    }

    for (NodeId node : truth.correct) {
        auto it = rt.first_selection_candidates.find(node);
        if (it == rt.first_selection_candidates.end()) {
            correct_first.fail(truth.rounds_executed,
                               node_witness(node, "never reached a selection"));
            continue;
        }
        for (NodeId peer : truth.correct) {
            if (!std::binary_search(it->second.begin(), it->second.end(), peer)) {
                correct_first.fail(3, node_witness(node, "first selection missed correct id " +
                                                             to_string(peer)));
            }
        }
    }

    v.properties = {candidate_relay, good_round, termination, correct_first};
    for (const auto& [node, iter] : rt.termination_iteration) {
        v.metrics.termination_round[node] = iter;
    }
    return v;
}

// --------------------------------------------------------------- consensus

Verdict verify_consensus(const Scenario&, const GroundTruth& truth) {
    const auto& ct = std::get<ConsensusTruth>(truth.detail);
    Verdict v;
    PropertyResult validity{"consensus.validity"};
    PropertyResult agreement{"consensus.agreement"};
    PropertyResult quorums{"consensus.quorum_exclusivity"};
    PropertyResult good_round{"consensus.good_round_convergence"};
    PropertyResult round_bound{"consensus.round_bound"};

    std::set<Value> input_set;
    for (const auto& [node, value] : ct.inputs) input_set.insert(value);

    // Agreement + termination.
    std::optional<Value> decided;
    for (NodeId node : truth.correct) {
        auto it = ct.outputs.find(node);
        if (it == ct.outputs.end()) {
            agreement.fail(truth.rounds_executed,
                           node_witness(node, "did not terminate"));
            continue;
        }
        if (!decided) {
            decided = it->second;
        } else if (*decided != it->second) {
            agreement.fail(ct.termination_round.at(node),
                           node_witness(node, "output " + to_string(it->second) +
                                                  " vs " + to_string(*decided)));
        }
    }

    // Validity as the protocol guarantees it: identical correct inputs force
    // that exact output with termination at the end of phase one. (With mixed
    // inputs a Byzantine coordinator may legally steer the common output to
    // any value, so nothing more is asserted there.)
    if (input_set.size() == 1) {
        for (NodeId node : truth.correct) {
            auto it = ct.outputs.find(node);
            if (it == ct.outputs.end() || it->second != *input_set.begin()) {
                validity.fail(truth.rounds_executed,
                              node_witness(node, "unanimous input not decided"));
            } else if (ct.termination_round.at(node) != 7) {
                validity.fail(ct.termination_round.at(node),
                              node_witness(node, "unanimity did not finish in phase 1"));
            }
        }
    }

    // Lemma 9: per delivery round and message kind, at most one value may
    // reach a two-thirds quorum at any correct node.
    std::map<std::pair<int, MsgKind>, std::set<Value>> quorum_values;
    for (NodeId node : truth.correct) {
        auto it = ct.observations.find(node);
        if (it == ct.observations.end()) continue;
        for (const QuorumObservation& obs : it->second) {
            if (obs.n_v < 1) continue;
            for (const auto& [value, count] : obs.counts) {
                if (ge_two_thirds(count, obs.n_v)) {
                    quorum_values[{obs.round, obs.kind}].insert(value);
                }
            }
        }
    }
    for (const auto& [key, values] : quorum_values) {
        if (values.size() > 1) {
            quorums.fail(key.first, std::string("two ") + to_string(key.second) +
                                        " values reached two-thirds quorums");
        }
    }

    // Lemma 11: the first phase with a common correct coordinator and no
    // earlier termination leaves every correct node with one opinion.
    int phases = ct.phases_run;
    for (int phase = 1; phase <= phases; ++phase) {
        int phase_end_round = 2 + 5 * phase;
        bool terminated_before = false;
        for (const auto& [node, round] : ct.termination_round) {
            if (round < phase_end_round) terminated_before = true;
        }
        if (terminated_before) break;
        std::optional<NodeId> common;
        bool all_same = true;
        for (NodeId node : truth.correct) {
            auto it = ct.coordinators.find(node);
            if (it == ct.coordinators.end() || !it->second.count(phase)) {
                all_same = false;
                break;
            }
            NodeId p = it->second.at(phase);
            if (!common) {
                common = p;
            } else if (*common != p) {
                all_same = false;
            }
        }
        if (!all_same || !common || !truth.correct.count(*common)) continue;
        std::optional<Value> opinion;
        for (NodeId node : truth.correct) {
            auto it = ct.opinion_at_phase_end.find(node);
            if (it == ct.opinion_at_phase_end.end() || !it->second.count(phase)) {
                continue;  // terminated exactly this phase; output checked above
            }
            Value x = it->second.at(phase);
            if (!opinion) {
                opinion = x;
            } else if (*opinion != x) {
                good_round.fail(phase_end_round,
                                node_witness(node, "opinion " + to_string(x) +
                                                       " diverges after good phase"));
            }
        }
        break;  // only the first qualifying phase is constrained
    }

    std::int64_t f = static_cast<std::int64_t>(truth.faulty.size());
    std::int64_t bound = 2 + 5 * (2 * f + 3);
    std::int64_t max_round = 0;
    for (const auto& [node, round] : ct.termination_round) {
        max_round = std::max<std::int64_t>(max_round, round);
        v.metrics.termination_round[node] = round;
    }
    v.metrics.extra["max_termination_round"] = max_round;
    if (max_round > bound) {
        round_bound.fail(static_cast<int>(max_round), "termination beyond 2+5(2f+3)");
    }

    v.properties = {validity, agreement, quorums, good_round, round_bound};
    return v;
}

// --------------------------------------------------------------- approximate agreement

Verdict verify_approx(const Scenario&, const GroundTruth& truth) {
    const auto& at = std::get<ApproxTruth>(truth.detail);
    Verdict v;
    PropertyResult containment{"approx.containment"};
    PropertyResult median{"approx.median_survival"};
    PropertyResult halving{"approx.halving"};

    for (int r = 1; r <= truth.rounds_executed; ++r) {
        std::vector<Value> inputs;
        std::vector<Value> outputs;
        for (NodeId node : truth.correct) {
            const auto& traj = at.trajectories.at(node);
            inputs.push_back(traj[static_cast<std::size_t>(r - 1)]);
            outputs.push_back(traj[static_cast<std::size_t>(r)]);
        }
        std::sort(inputs.begin(), inputs.end());
        Value i_min = inputs.front();
        Value i_max = inputs.back();
        Value med_lo = inputs[(inputs.size() - 1) / 2];
        Value med_hi = inputs[inputs.size() / 2];

        for (NodeId node : truth.correct) {
            Value out = at.trajectories.at(node)[static_cast<std::size_t>(r)];
            if (out < i_min || out > i_max) {
                containment.fail(r, node_witness(node, "output " + to_string(out) +
                                                            " outside input range"));
            }
            const auto& interval =
                at.trimmed_intervals.at(node)[static_cast<std::size_t>(r - 1)];
            if (med_lo < interval.first || med_lo > interval.second ||
                med_hi < interval.first || med_hi > interval.second) {
                median.fail(r, node_witness(node, "correct median trimmed away"));
            }
        }

        Value o_min = *std::min_element(outputs.begin(), outputs.end());
        Value o_max = *std::max_element(outputs.begin(), outputs.end());
        Value in_range = i_max.minus(i_min);
        Value out_range = o_max.minus(o_min);
        Value half_in = in_range.midpoint(Value::of(0));
        if (out_range > half_in) {
            halving.fail(r, "output range " + to_string(out_range) +
                                " exceeds half of " + to_string(in_range));
        }
        if (in_range > Value::of(0) && !(out_range < in_range)) {
            halving.fail(r, "output range failed to shrink strictly");
        }
    }

    v.properties = {containment, median, halving};
    return v;
}

// --------------------------------------------------------------- parallel consensus

// Replay an adopted instance as if the node had started it with input bottom
// and been aware from round one; outside of pre-adoption markers the visible
// behavior must match exactly.
bool replay_instance(NodeId node, std::uint64_t key, const GroundTruth& truth,
                     const ParallelTruth& pt, std::string& why) {
    const std::set<NodeId>& members = pt.frozen_members.at(node);
    std::int64_t n = static_cast<std::int64_t>(members.size());

    // Gather this node's view per round: instance traffic delivered to it and
    // its own recorded sends (self-deliveries).
    std::map<int, std::vector<std::pair<NodeId, Payload>>> delivered;
    std::map<int, std::vector<Payload>> sent;
    for (const Delivery& d : truth.deliveries) {
        if (d.to != node) continue;
        if (!d.payload.instance || d.payload.instance->run != 0 ||
            d.payload.instance->key != key) {
            continue;
        }
        if (members.count(d.from)) delivered[d.round].push_back({d.from, d.payload});
        if (d.from == node) sent[d.round - 1].push_back(d.payload);
    }

    PcInstanceCore core(Value::bottom(), 1);
    std::map<int, RoundInbox> sp_stash;
    auto typed_eval = [&](int round, MsgKind kind, MsgKind marker) {
        PcInstanceCore::Eval e;
        for (const auto& [from, p] : delivered[round]) {
            if (p.kind == kind) {
                ++e.counts[p.value];
                e.any_typed = true;
                e.blockers.insert(from);
            } else if (p.kind == marker) {
                e.blockers.insert(from);
            }
        }
        return e;
    };

    std::optional<int> replay_termination;
    std::optional<Value> replay_output;
    for (int g = 3; g <= truth.rounds_executed && !replay_termination; ++g) {
        int sub = (g - 3) % 5 + 1;
        bool phase1 = (g - 3) / 5 == 0;
        std::vector<Payload> predicted;
        switch (sub) {
            case 1:
                if (auto x = core.input_send()) predicted.push_back(Payload::input(*x));
                break;
            case 2: {
                auto e = typed_eval(g, MsgKind::Input, MsgKind::NoPreference);
                predicted.push_back(core.eval_input(e, members, n, phase1));
                break;
            }
            case 3: {
                auto e = typed_eval(g, MsgKind::Prefer, MsgKind::NoPreference);
                predicted.push_back(core.eval_prefer(e, members, n, phase1));
                break;
            }
            case 4: {
                // strongprefer traffic delivered now is consumed next round
                break;
            }
            case 5: {
                auto e = typed_eval(g - 1, MsgKind::StrongPrefer,
                                    MsgKind::NoStrongPreference);
                std::optional<Value> c;
                int phase = (g - 3) / 5 + 1;
                auto cit = pt.coordinators.find(node);
                if (cit != pt.coordinators.end() && cit->second.count(phase)) {
                    NodeId coordinator = cit->second.at(phase);
                    for (const auto& [from, p] : delivered[g]) {
                        if (from == coordinator && p.kind == MsgKind::Opinion) {
                            if (!c || p.value < *c) c = p.value;
                        }
                    }
                }
                auto d = core.eval_strongprefer(e, c, members, n, phase1);
                if (d.terminated_now) {
                    replay_termination = g;
                    replay_output = d.output;
                }
                break;
            }
        }
        // Compare typed sends; markers before adoption are invisible to peers
        // of a not-yet-created instance, so they are excluded from the check.
        auto is_typed = [](const Payload& p) {
            return p.kind == MsgKind::Input || p.kind == MsgKind::Prefer ||
                   p.kind == MsgKind::StrongPrefer;
        };
        std::vector<Payload> predicted_typed;
        for (Payload& p : predicted) {
            if (is_typed(p)) {
                p.instance = InstanceId{0, key};
                predicted_typed.push_back(p);
            }
        }
        std::vector<Payload> recorded_typed;
        for (const Payload& p : sent[g]) {
            if (is_typed(p)) recorded_typed.push_back(p);
        }
        std::sort(predicted_typed.begin(), predicted_typed.end());
        std::sort(recorded_typed.begin(), recorded_typed.end());
        if (predicted_typed != recorded_typed) {
            why = "round " + std::to_string(g) + " sends diverge from bottom-start replay";
            return false;
        }
    }

    auto tit = pt.termination_round.find(node);
    std::optional<int> recorded_term;
    if (tit != pt.termination_round.end() && tit->second.count(key)) {
        recorded_term = tit->second.at(key);
    }
    if (recorded_term != replay_termination) {
        why = "termination round diverges from bottom-start replay";
        return false;
    }
    auto oit = pt.outputs.find(node);
    std::optional<Value> recorded_out;
    if (oit != pt.outputs.end() && oit->second.count(key)) {
        recorded_out = oit->second.at(key);
    }
    if (recorded_out != replay_output) {
        why = "output diverges from bottom-start replay";
        return false;
    }
    return true;
}

Verdict verify_parallel(const Scenario&, const GroundTruth& truth) {
    const auto& pt = std::get<ParallelTruth>(truth.detail);
    Verdict v;
    PropertyResult validity{"parallel.validity"};
    PropertyResult agreement{"parallel.agreement"};
    PropertyResult no_phantom{"parallel.no_phantom"};
    PropertyResult termination{"parallel.termination"};
    PropertyResult alignment{"parallel.grid_alignment"};

    // Validity: pairs input identically at every correct node must be output.
    std::map<std::uint64_t, std::set<Value>> common;
    std::set<std::uint64_t> everywhere;
    bool first = true;
    for (NodeId node : truth.correct) {
        auto it = pt.inputs.find(node);
        std::set<std::uint64_t> keys;
        if (it != pt.inputs.end()) {
            for (const auto& [key, value] : it->second) {
                keys.insert(key);
                common[key].insert(value);
            }
        }
        if (first) {
            everywhere = keys;
            first = false;
        } else {
            std::set<std::uint64_t> inter;
            std::set_intersection(everywhere.begin(), everywhere.end(), keys.begin(),
                                  keys.end(), std::inserter(inter, inter.begin()));
            everywhere = inter;
        }
    }
    for (std::uint64_t key : everywhere) {
        if (common[key].size() != 1) continue;  // differing values: no guarantee
        Value x = *common[key].begin();
        for (NodeId node : truth.correct) {
            auto it = pt.outputs.find(node);
            if (it == pt.outputs.end() || !it->second.count(key) ||
                it->second.at(key) != x) {
                validity.fail(truth.rounds_executed,
                              node_witness(node, "common pair " + std::to_string(key) +
                                                     " not output"));
            }
        }
    }

    // Agreement: any output pair is output identically by all correct nodes.
    std::map<std::uint64_t, Value> outputs_union;
    for (NodeId node : truth.correct) {
        auto it = pt.outputs.find(node);
        if (it == pt.outputs.end()) continue;
        for (const auto& [key, value] : it->second) {
            auto prev = outputs_union.find(key);
            if (prev != outputs_union.end() && prev->second != value) {
                agreement.fail(truth.rounds_executed,
                               "pair " + std::to_string(key) + " decided two ways");
            }
            outputs_union[key] = value;
        }
    }
    for (const auto& [key, value] : outputs_union) {
        for (NodeId node : truth.correct) {
            auto it = pt.outputs.find(node);
            if (it == pt.outputs.end() || !it->second.count(key)) {
                agreement.fail(truth.rounds_executed,
                               node_witness(node, "missing output pair " +
                                                      std::to_string(key)));
            }
        }
    }

    // Phantom instances: never input at a correct node, never output.
    std::set<std::uint64_t> input_keys;
    for (const auto& [node, pairs] : pt.inputs) {
        for (const auto& [key, value] : pairs) input_keys.insert(key);
    }
    for (const auto& [key, value] : outputs_union) {
        if (!input_keys.count(key)) {
            no_phantom.fail(truth.rounds_executed,
                            "phantom id " + std::to_string(key) + " output " +
                                to_string(value));
        }
    }

    for (NodeId node : truth.correct) {
        auto it = pt.resolved.find(node);
        if (it == pt.resolved.end() || !it->second) {
            termination.fail(truth.rounds_executed,
                             node_witness(node, "instances still unresolved"));
        }
    }

    // Adopted instances must match a bottom-start execution bit for bit
    // (markers before the adoption round aside).
    for (NodeId node : truth.correct) {
        auto it = pt.created_round.find(node);
        if (it == pt.created_round.end()) continue;
        for (const auto& [key, created] : it->second) {
            if (created <= 1) continue;  // started at pc_start
            std::string why;
            if (!replay_instance(node, key, truth, pt, why)) {
                alignment.fail(created, node_witness(node, why));
            }
        }
    }

    for (const auto& [node, per_key] : pt.termination_round) {
        for (const auto& [key, round] : per_key) {
            v.metrics.termination_round[node] =
                std::max<std::int64_t>(v.metrics.termination_round[node], round);
        }
    }
    v.properties = {validity, agreement, no_phantom, termination, alignment};
    return v;
}

// --------------------------------------------------------------- dynamic total order

Verdict verify_dynamic(const Scenario&, const GroundTruth& truth) {
    const auto& dt = std::get<DynamicTruth>(truth.detail);
    Verdict v;
    PropertyResult prefix{"dto.chain_prefix"};
    PropertyResult growth{"dto.chain_growth"};
    PropertyResult round_agreement{"dto.round_agreement"};
    PropertyResult soundness{"dto.finality_soundness"};

    for (NodeId node : truth.correct) {
        auto it = dt.round_counter.find(node);
        if (it == dt.round_counter.end()) continue;
        for (const auto& [global, local] : it->second) {
            if (local != global) {
                round_agreement.fail(global,
                                     node_witness(node, "round counter " +
                                                            std::to_string(local)));
            }
        }
    }

    auto halted_at = [&](NodeId node) {
        auto it = dt.halted_round.find(node);
        return it == dt.halted_round.end() ? truth.rounds_executed + 1 : it->second;
    };

    // Chain prefix at every round, over the instance domain both nodes share.
    std::vector<NodeId> correct(truth.correct.begin(), truth.correct.end());
    for (std::size_t i = 0; i < correct.size(); ++i) {
        for (std::size_t j = i + 1; j < correct.size(); ++j) {
            NodeId a = correct[i];
            NodeId b = correct[j];
            std::int64_t lo = std::max(dt.first_run.count(a) ? dt.first_run.at(a) : 1,
                                       dt.first_run.count(b) ? dt.first_run.at(b) : 1);
            const auto& ca = dt.chains.count(a) ? dt.chains.at(a)
                                                : std::vector<std::pair<ChainEntry, int>>{};
            const auto& cb = dt.chains.count(b) ? dt.chains.at(b)
                                                : std::vector<std::pair<ChainEntry, int>>{};
            int last = std::min({truth.rounds_executed, halted_at(a) - 1, halted_at(b) - 1});
            // append-only chains: compare the filtered sequences as of each
            // round by sweeping the append rounds
            std::size_t ia = 0;
            std::size_t ib = 0;
            std::vector<ChainEntry> fa;
            std::vector<ChainEntry> fb;
            for (int r = 1; r <= last; ++r) {
                while (ia < ca.size() && ca[ia].second <= r) {
                    if (ca[ia].first.instance_round >= lo) fa.push_back(ca[ia].first);
                    ++ia;
                }
                while (ib < cb.size() && cb[ib].second <= r) {
                    if (cb[ib].first.instance_round >= lo) fb.push_back(cb[ib].first);
                    ++ib;
                }
                const auto& shorter = fa.size() <= fb.size() ? fa : fb;
                const auto& longer = fa.size() <= fb.size() ? fb : fa;
                if (!std::equal(shorter.begin(), shorter.end(), longer.begin())) {
                    prefix.fail(r, "chains of " + to_string(a) + " and " + to_string(b) +
                                       " are not prefix-ordered");
                    r = last + 1;  // first violation recorded; stop this pair
                }
            }
        }
    }

    // Chain growth: the designated submitter's events reach every correct
    // chain by the arithmetic finality round of their instance.
    for (const EventSpec& e : dt.submitted_events) {
        std::int64_t q = e.round + 1;  // collected next round
        for (NodeId node : truth.correct) {
            if (!dt.first_run.count(node) || dt.first_run.at(node) > q) continue;
            if (!dt.snapshots.count(node)) continue;
            const auto& snaps = dt.snapshots.at(node);
            if (!snaps.count(q)) continue;
            std::int64_t deadline = 0;
            bool computable = true;
            for (std::int64_t qq = dt.first_run.at(node); qq <= q; ++qq) {
                auto sit = snaps.find(qq);
                if (sit == snaps.end()) {
                    computable = false;
                    break;
                }
                std::int64_t size = static_cast<std::int64_t>(sit->second.size());
                deadline = std::max(deadline, qq + (5 * size + 4) / 2 + 1);
            }
            if (!computable || deadline > truth.rounds_executed ||
                deadline >= halted_at(node)) {
                continue;
            }
            bool found = false;
            auto cit = dt.chains.find(node);
            if (cit != dt.chains.end()) {
                for (const auto& [entry, append_round] : cit->second) {
                    if (entry.instance_round == q && entry.submitter == e.node &&
                        entry.event == e.value && append_round <= deadline) {
                        found = true;
                    }
                }
            }
            if (!found) {
                growth.fail(static_cast<int>(deadline),
                            node_witness(node, "event of round " +
                                                   std::to_string(e.round) +
                                                   " missing past its window"));
            }
        }
    }

    // Finality soundness: a round that became final at one correct node has
    // terminated everywhere (among the nodes that ran it).
    for (NodeId node : truth.correct) {
        auto fit = dt.final_upto.find(node);
        if (fit == dt.final_upto.end()) continue;
        std::int64_t prev = 0;
        bool have_prev = false;
        std::int64_t first = dt.first_run.count(node) ? dt.first_run.at(node) : 1;
        for (const auto& [round, upto] : fit->second) {
            // Runs before a joiner's first own run are vacuously final for it
            // (it holds no outputs for them), so soundness starts at first.
            std::int64_t from = std::max(have_prev ? prev + 1 : 1, first);
            for (std::int64_t q = from; q <= upto; ++q) {
                for (NodeId peer : truth.correct) {
                    if (!dt.first_run.count(peer) || dt.first_run.at(peer) > q) continue;
                    if (halted_at(peer) <= round) continue;
                    auto tl = dt.term_log.find(peer);
                    if (tl == dt.term_log.end()) continue;
                    auto rl = tl->second.find(q);
                    if (rl == tl->second.end()) continue;  // no instances at peer
                    for (const auto& [key, term_round] : rl->second) {
                        if (term_round >= round) {
                            soundness.fail(round,
                                           node_witness(peer,
                                                        "instance of run " +
                                                            std::to_string(q) +
                                                            " terminated only at round " +
                                                            std::to_string(term_round)));
                        }
                    }
                }
            }
            prev = upto;
            have_prev = true;
        }
    }

    v.properties = {prefix, growth, round_agreement, soundness};
    for (NodeId node : truth.correct) {
        auto cit = dt.chains.find(node);
        v.metrics.extra["chain_len_" + to_string(node)] =
            cit == dt.chains.end() ? 0 : static_cast<std::int64_t>(cit->second.size());
    }
    return v;
}

}  // namespace

const std::vector<std::string>& required_properties(Protocol p) {
    static const std::vector<std::string> rb = {
        "rb.correctness", "rb.unforgeability", "rb.relay", "rb.one_third_support",
        "rb.two_thirds_support"};
    static const std::vector<std::string> rotor = {
        "rotor.candidate_relay", "rotor.good_round", "rotor.termination_bound",
        "rotor.correct_ids_first"};
    static const std::vector<std::string> consensus = {
        "consensus.validity", "consensus.agreement", "consensus.quorum_exclusivity",
        "consensus.good_round_convergence", "consensus.round_bound"};
    static const std::vector<std::string> approx = {
        "approx.containment", "approx.median_survival", "approx.halving"};
    static const std::vector<std::string> parallel = {
        "parallel.validity", "parallel.agreement", "parallel.no_phantom",
        "parallel.termination", "parallel.grid_alignment"};
    static const std::vector<std::string> dynamic = {
        "dto.chain_prefix", "dto.chain_growth", "dto.round_agreement",
        "dto.finality_soundness"};
    static const std::vector<std::string> none = {};
    switch (p) {
        case Protocol::Rb: return rb;
        case Protocol::Rotor: return rotor;
        case Protocol::Consensus: return consensus;
        case Protocol::Approx: return approx;
        case Protocol::Parallel: return parallel;
        case Protocol::Dynamic: return dynamic;
        case Protocol::PartitionDemo: return none;
    }
    return none;
}

Verdict verify_run(const Scenario& s, const GroundTruth& truth) {
    Verdict v;
    switch (s.protocol) {
        case Protocol::Rb: v = verify_rb(s, truth); break;
        case Protocol::Rotor: v = verify_rotor(s, truth); break;
        case Protocol::Consensus: v = verify_consensus(s, truth); break;
        case Protocol::Approx: v = verify_approx(s, truth); break;
        case Protocol::Parallel: v = verify_parallel(s, truth); break;
        case Protocol::Dynamic: v = verify_dynamic(s, truth); break;
        case Protocol::PartitionDemo: break;
    }
    v.metrics.rounds = truth.rounds_executed;
    v.metrics.messages = truth.deliveries_count;
    // A verdict must cover the protocol's complete property list.
    for (const std::string& name : required_properties(s.protocol)) {
        if (!v.find(name)) {
            throw ProtocolError("verdict missing required property " + name);
        }
    }
    return v;
}

}  // namespace idbft::sim
