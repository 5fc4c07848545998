// The n_v/3 and 2n_v/3 quorum tests, in exact integer arithmetic.

#pragma once

#include <cstdint>
#include <stdexcept>

namespace idbft {

// count >= n/3, evaluated as 3*count >= n so the boundary is exact.
inline bool ge_one_third(std::int64_t count, std::int64_t n) {
    if (n < 1 || count < 0) throw std::invalid_argument("ge_one_third: bad arguments");
    return 3 * count >= n;
}

// count >= 2n/3.
inline bool ge_two_thirds(std::int64_t count, std::int64_t n) {
    if (n < 1 || count < 0) throw std::invalid_argument("ge_two_thirds: bad arguments");
    return 3 * count >= 2 * n;
}

}  // namespace idbft
