// Per-property pass/fail results for a scenario run.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idbft/sim/scenario.hpp"
#include "idbft/types.hpp"

namespace idbft::sim {

struct PropertyResult {
    std::string name;
    bool pass = true;
    std::optional<int> first_violation_round;
    std::string witness;  // minimal description of the first violation

    void fail(int round, std::string w) {
        if (pass) {
            pass = false;
            first_violation_round = round;
            witness = std::move(w);
        }
    }
};

struct Metrics {
    int rounds = 0;
    std::uint64_t messages = 0;
    std::map<NodeId, std::int64_t> termination_round;
    std::map<std::string, std::int64_t> extra;
};

struct Verdict {
    std::vector<PropertyResult> properties;
    Metrics metrics;

    bool all_pass() const {
        for (const auto& p : properties) {
            if (!p.pass) return false;
        }
        return true;
    }
    const PropertyResult* find(const std::string& name) const {
        for (const auto& p : properties) {
            if (p.name == name) return &p;
        }
        return nullptr;
    }
};

// The complete property list a Verdict must carry for each protocol; the
// engine refuses to return a Verdict missing any of them.
const std::vector<std::string>& required_properties(Protocol p);

}  // namespace idbft::sim
