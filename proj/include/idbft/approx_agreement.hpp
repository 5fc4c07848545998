// One-round trimmed-midpoint approximate agreement, exact rationals.

#pragma once

#include <functional>
#include <vector>

#include "idbft/types.hpp"

namespace idbft {

// Sorted copy with the floor(n/3) smallest and floor(n/3) largest elements
// removed (multiset semantics). Throws on empty input.
std::vector<Value> aa_trim(std::vector<Value> values);

// Midpoint of the trimmed extremes: (min S_v + max S_v) / 2.
Value aa_output(const std::vector<Value>& values);

// Iterated agreement driven by a delivery function: each round, node i
// broadcasts its current value and receives the multiset `received(round, i)`
// (which must include its own value; an empty multiset leaves the value
// unchanged). Returns the value trajectory per node, inputs included, so the
// result has rounds+1 entries per node.
std::vector<std::vector<Value>> aa_iterate(
    const std::vector<Value>& inputs, int rounds,
    const std::function<std::vector<Value>(int round, std::size_t node)>& received);

}  // namespace idbft
