// Deterministic lockstep round engine: collect correct outboxes, ask the
// adversary for Byzantine traffic, deliver with per-round duplicate
// suppression, step every node, record ground truth, then verify every
// property of the protocol under test.

#pragma once

#include <utility>

#include "idbft/sim/scenario.hpp"
#include "idbft/sim/truth.hpp"
#include "idbft/sim/verdict.hpp"

namespace idbft::sim {

struct RunResult {
    GroundTruth truth;
    Verdict verdict;
};

// Deterministic given (scenario, seed). Throws ScenarioError on invalid
// scenarios and ProtocolError on model violations inside the run.
RunResult run_scenario(const Scenario& scenario);

// Property evaluation over a recorded run (exposed for tests).
Verdict verify_run(const Scenario& scenario, const GroundTruth& truth);

}  // namespace idbft::sim
