#include <fstream>
#include <set>

#include "idbft/sim/report.hpp"

namespace idbft::sim {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ScenarioError("unknown field '" + it.key() + "' in " + where);
        }
    }
}

std::int64_t get_int(const json& obj, const std::string& key) {
    if (!obj.at(key).is_number_integer()) {
        throw ScenarioError("field '" + key + "' must be an integer");
    }
    return obj.at(key).get<std::int64_t>();
}

Value get_value(const json& v, const std::string& where) {
    if (!v.is_number_integer()) {
        throw ScenarioError("value in " + where + " must be an integer");
    }
    return Value::of(v.get<std::int64_t>());
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
    if (!doc.is_object()) throw ScenarioError("scenario must be a JSON object");
    require_keys(doc,
                 {"protocol", "nodes", "adversary", "rounds", "seed", "churn", "output",
                  "iterations", "cross_delay", "submitter", "events",
                  "invalid_resilience", "expect_fail", "trace"},
                 "scenario");

    Scenario s;
    if (!doc.contains("protocol") || !doc.at("protocol").is_string()) {
        throw ScenarioError("missing protocol");
    }
    auto proto = protocol_from_string(doc.at("protocol").get<std::string>());
    if (!proto) throw ScenarioError("unknown protocol " + doc.at("protocol").dump());
    s.protocol = *proto;

    if (!doc.contains("nodes") || !doc.at("nodes").is_array()) {
        throw ScenarioError("missing nodes array");
    }
    for (const json& nd : doc.at("nodes")) {
        if (!nd.is_object()) throw ScenarioError("node entries must be objects");
        require_keys(nd, {"id", "faulty", "input", "pairs"}, "node");
        NodeSpec spec;
        if (!nd.contains("id")) throw ScenarioError("node without id");
        spec.id = NodeId{static_cast<std::uint64_t>(get_int(nd, "id"))};
        if (nd.contains("faulty")) {
            if (!nd.at("faulty").is_boolean()) throw ScenarioError("faulty must be bool");
            spec.faulty = nd.at("faulty").get<bool>();
        }
        if (nd.contains("input")) spec.input = get_value(nd.at("input"), "input");
        if (nd.contains("pairs")) {
            if (s.protocol != Protocol::Parallel) {
                throw ScenarioError("pairs only apply to parallel scenarios");
            }
            for (const json& pr : nd.at("pairs")) {
                if (!pr.is_array() || pr.size() != 2) {
                    throw ScenarioError("pairs must be [id, value] arrays");
                }
                spec.pairs.emplace_back(pr.at(0).get<std::uint64_t>(),
                                        get_value(pr.at(1), "pair value"));
            }
        }
        s.nodes.push_back(std::move(spec));
    }

    if (doc.contains("adversary")) {
        const json& adv = doc.at("adversary");
        if (!adv.is_object()) throw ScenarioError("adversary must be an object");
        require_keys(adv, {"name", "params"}, "adversary");
        if (!adv.contains("name")) throw ScenarioError("adversary without name");
        s.adversary = adv.at("name").get<std::string>();
        if (adv.contains("params")) {
            for (auto it = adv.at("params").begin(); it != adv.at("params").end(); ++it) {
                if (!it.value().is_number_integer()) {
                    throw ScenarioError("adversary params must be integers");
                }
                s.adversary_params[it.key()] = it.value().get<std::int64_t>();
            }
        }
    }

    if (doc.contains("rounds")) s.rounds = static_cast<int>(get_int(doc, "rounds"));
    if (doc.contains("seed")) s.seed = static_cast<std::uint64_t>(get_int(doc, "seed"));
    if (doc.contains("iterations")) {
        if (s.protocol != Protocol::Approx) {
            throw ScenarioError("iterations only apply to approx scenarios");
        }
        s.iterations = static_cast<int>(get_int(doc, "iterations"));
        if (s.iterations < 0) throw ScenarioError("iterations must be >= 0");
    }
    if (doc.contains("cross_delay")) {
        if (s.protocol != Protocol::PartitionDemo) {
            throw ScenarioError("cross_delay only applies to partition_demo");
        }
        s.cross_delay = static_cast<int>(get_int(doc, "cross_delay"));
    }
    if (doc.contains("submitter")) {
        if (s.protocol != Protocol::Dynamic) {
            throw ScenarioError("submitter only applies to dynamic scenarios");
        }
        s.submitter = NodeId{static_cast<std::uint64_t>(get_int(doc, "submitter"))};
    }
    if (doc.contains("events")) {
        if (s.protocol != Protocol::Dynamic) {
            throw ScenarioError("events only apply to dynamic scenarios");
        }
        for (const json& ev : doc.at("events")) {
            require_keys(ev, {"round", "node", "value"}, "event");
            EventSpec e;
            e.round = static_cast<int>(get_int(ev, "round"));
            e.node = NodeId{static_cast<std::uint64_t>(get_int(ev, "node"))};
            e.value = get_value(ev.at("value"), "event value");
            s.events.push_back(e);
        }
    }
    if (doc.contains("churn")) {
        if (s.protocol != Protocol::Dynamic) {
            throw ScenarioError("churn only applies to dynamic scenarios");
        }
        for (const json& ch : doc.at("churn")) {
            require_keys(ch, {"round", "join", "leave"}, "churn entry");
            int round = static_cast<int>(get_int(ch, "round"));
            auto apply = [&](const std::string& key, bool join) {
                if (!ch.contains(key)) return;
                for (const json& idj : ch.at(key)) {
                    NodeId id{idj.get<std::uint64_t>()};
                    bool found = false;
                    for (NodeSpec& spec : s.nodes) {
                        if (spec.id == id) {
                            found = true;
                            auto& slot = join ? spec.join_round : spec.leave_round;
                            if (slot) throw ScenarioError("node churned twice");
                            slot = round;
                        }
                    }
                    if (!found) throw ScenarioError("churn references unknown node");
                }
            };
            apply("join", true);
            apply("leave", false);
        }
    }
    if (doc.contains("invalid_resilience")) {
        s.allow_invalid_resilience = doc.at("invalid_resilience").get<bool>();
    }
    if (doc.contains("expect_fail")) s.expect_fail = doc.at("expect_fail").get<bool>();
    if (doc.contains("trace")) s.log_deliveries = doc.at("trace").get<bool>();

    s.validate();
    return s;
}

std::string scenario_output_path(const json& doc) {
    if (doc.is_object() && doc.contains("output")) {
        return doc.at("output").get<std::string>();
    }
    return {};
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }
    return scenario_from_json(doc);
}

nlohmann::ordered_json scenario_to_json(const Scenario& s) {
    nlohmann::ordered_json doc;
    doc["protocol"] = to_string(s.protocol);
    doc["seed"] = s.seed;
    doc["rounds"] = s.rounds;
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const NodeSpec& n : s.nodes) {
        nlohmann::ordered_json nd;
        nd["id"] = n.id.value;
        nd["faulty"] = n.faulty;
        if (n.input) nd["input"] = n.input->num();
        if (!n.pairs.empty()) {
            nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
            for (const auto& [key, value] : n.pairs) {
                pairs.push_back({key, value.num()});
            }
            nd["pairs"] = pairs;
        }
        if (n.join_round) nd["join"] = *n.join_round;
        if (n.leave_round) nd["leave"] = *n.leave_round;
        nodes.push_back(nd);
    }
    doc["nodes"] = nodes;
    doc["adversary"] = {{"name", s.adversary}};
    if (!s.adversary_params.empty()) {
        nlohmann::ordered_json params;
        for (const auto& [key, value] : s.adversary_params) params[key] = value;
        doc["adversary"]["params"] = params;
    }
    if (s.protocol == Protocol::Approx) doc["iterations"] = s.iterations;
    if (s.protocol == Protocol::PartitionDemo) doc["cross_delay"] = s.cross_delay;
    if (s.submitter) doc["submitter"] = s.submitter->value;
    if (s.allow_invalid_resilience) doc["invalid_resilience"] = true;
    if (s.expect_fail) doc["expect_fail"] = true;
    return doc;
}

}  // namespace idbft::sim
