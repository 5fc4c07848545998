#include "idbft/sim/report.hpp"

namespace idbft::sim {

namespace {

nlohmann::ordered_json value_json(const Value& v) {
    if (v.is_bottom()) return nullptr;
    if (v.den() == 1) return v.num();
    return to_string(v);
}

nlohmann::ordered_json outputs_json(const GroundTruth& truth) {
    nlohmann::ordered_json out;
    if (const auto* rb = std::get_if<RbTruth>(&truth.detail)) {
        for (const auto& [node, per_body] : rb->accept_round) {
            nlohmann::ordered_json accepted = nlohmann::ordered_json::array();
            for (const auto& [body, round] : per_body) {
                accepted.push_back({{"body", value_json(body)}, {"round", round}});
            }
            out[to_string(node)] = accepted;
        }
    } else if (const auto* rt = std::get_if<RotorTruth>(&truth.detail)) {
        for (const auto& [node, iter] : rt->termination_iteration) {
            out[to_string(node)] = {{"terminated_iteration", iter}};
        }
    } else if (const auto* ct = std::get_if<ConsensusTruth>(&truth.detail)) {
        for (NodeId node : truth.correct) {
            auto it = ct->outputs.find(node);
            out[to_string(node)] =
                it == ct->outputs.end() ? nullptr : value_json(it->second);
        }
    } else if (const auto* at = std::get_if<ApproxTruth>(&truth.detail)) {
        for (const auto& [node, traj] : at->trajectories) {
            out[to_string(node)] = value_json(traj.back());
        }
    } else if (const auto* pt = std::get_if<ParallelTruth>(&truth.detail)) {
        for (NodeId node : truth.correct) {
            nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
            auto it = pt->outputs.find(node);
            if (it != pt->outputs.end()) {
                for (const auto& [key, value] : it->second) {
                    pairs.push_back({key, value_json(value)});
                }
            }
            out[to_string(node)] = pairs;
        }
    } else if (const auto* dt = std::get_if<DynamicTruth>(&truth.detail)) {
        for (NodeId node : truth.correct) {
            nlohmann::ordered_json chain = nlohmann::ordered_json::array();
            auto it = dt->chains.find(node);
            if (it != dt->chains.end()) {
                for (const auto& [entry, append_round] : it->second) {
                    chain.push_back({entry.instance_round, entry.submitter.value,
                                     value_json(entry.event)});
                }
            }
            out[to_string(node)] = chain;
        }
    }
    return out;
}

}  // namespace

nlohmann::ordered_json make_report(const Scenario& s, const RunResult& run) {
    nlohmann::ordered_json doc;
    doc["tool"] = {{"name", "idbft"}, {"version", kToolVersion}};
    doc["scenario"] = scenario_to_json(s);
    nlohmann::ordered_json props = nlohmann::ordered_json::array();
    for (const PropertyResult& p : run.verdict.properties) {
        nlohmann::ordered_json pj;
        pj["name"] = p.name;
        pj["pass"] = p.pass;
        if (!p.pass) {
            pj["first_violation_round"] = p.first_violation_round.value_or(-1);
            pj["witness"] = p.witness;
        }
        props.push_back(pj);
    }
    doc["verdict"] = {{"all_pass", run.verdict.all_pass()}, {"properties", props}};
    nlohmann::ordered_json metrics;
    metrics["rounds"] = run.verdict.metrics.rounds;
    metrics["messages"] = run.verdict.metrics.messages;
    nlohmann::ordered_json term;
    for (const auto& [node, round] : run.verdict.metrics.termination_round) {
        term[to_string(node)] = round;
    }
    metrics["termination_round"] = term;
    if (!run.verdict.metrics.extra.empty()) {
        nlohmann::ordered_json extra;
        for (const auto& [key, value] : run.verdict.metrics.extra) extra[key] = value;
        metrics["extra"] = extra;
    }
    doc["metrics"] = metrics;
    doc["outputs"] = outputs_json(run.truth);
    return doc;
}

nlohmann::ordered_json make_partition_report(const Scenario& s,
                                             const PartitionReport& r) {
    nlohmann::ordered_json doc;
    doc["tool"] = {{"name", "idbft"}, {"version", kToolVersion}};
    doc["scenario"] = scenario_to_json(s);
    nlohmann::ordered_json outputs;
    for (const auto& [node, value] : r.outputs) {
        outputs[to_string(node)] = {{"output", value_json(value)},
                                    {"round", r.decision_round.at(node)}};
    }
    doc["outputs"] = outputs;
    doc["cross_delay"] = r.cross_delay;
    doc["rounds"] = r.rounds_executed;
    doc["disagreement"] = r.disagreement;
    return doc;
}

}  // namespace idbft::sim
