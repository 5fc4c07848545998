#include "idbft/approx_agreement.hpp"

#include <algorithm>
#include <stdexcept>

namespace idbft {

std::vector<Value> aa_trim(std::vector<Value> values) {
    if (values.empty()) throw std::invalid_argument("aa_trim: empty multiset");
    std::sort(values.begin(), values.end());
    std::size_t k = values.size() / 3;
    return {values.begin() + static_cast<std::ptrdiff_t>(k),
            values.end() - static_cast<std::ptrdiff_t>(k)};
}

Value aa_output(const std::vector<Value>& values) {
    std::vector<Value> trimmed = aa_trim(values);
    return trimmed.front().midpoint(trimmed.back());
}

std::vector<std::vector<Value>> aa_iterate(
    const std::vector<Value>& inputs, int rounds,
    const std::function<std::vector<Value>(int round, std::size_t node)>& received) {
    std::vector<std::vector<Value>> trajectories(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) trajectories[i] = {inputs[i]};
    for (int r = 1; r <= rounds; ++r) {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            std::vector<Value> multiset = received(r, i);
            Value next = multiset.empty() ? trajectories[i].back() : aa_output(multiset);
            trajectories[i].push_back(next);
        }
    }
    return trajectories;
}

}  // namespace idbft
