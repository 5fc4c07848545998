// Bounded exhaustive adversary exploration for reliable broadcast: every
// per-round, per-recipient Byzantine schedule over a two-body alphabet is
// enumerated (with joint-state deduplication), and the correctness,
// unforgeability and relay properties are checked on every branch.

#pragma once

#include <cstdint>

namespace idbft::sim {

struct ExploreParams {
    int n = 4;
    int f = 1;
    int horizon = 8;
    bool byz_sender = true;  // the designated sender is one of the f Byzantine nodes
    std::uint64_t transition_cap = 200'000'000;
};

struct ExploreResult {
    bool refused = false;       // state-space estimate above the cap
    std::uint64_t estimate = 0;
    std::uint64_t transitions = 0;
    std::uint64_t states = 0;
    std::uint64_t correctness_violations = 0;
    std::uint64_t unforgeability_violations = 0;
    std::uint64_t relay_violations = 0;

    std::uint64_t total_violations() const {
        return correctness_violations + unforgeability_violations + relay_violations;
    }
};

ExploreResult explore_rb(const ExploreParams& params);

}  // namespace idbft::sim
