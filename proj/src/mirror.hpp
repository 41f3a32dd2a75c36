#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace trapan::detail {

// Symmetric (edge-inclusive) mirror index for an axis of n >= 1 samples,
// folded as often as needed so any offset is valid:
// ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
inline std::size_t mirror_index(long i, long n) {
    assert(n > 0);
    const long period = 2 * n;
    long k = i % period;
    if (k < 0) k += period;
    return static_cast<std::size_t>(k < n ? k : period - 1 - k);
}

// Padded-axis lookup table: entry p maps padded coordinate p to its source
// coordinate for a pad of `pad` samples on each side.
inline std::vector<std::size_t> mirror_map(std::size_t n, int pad) {
    std::vector<std::size_t> map(n + 2 * static_cast<std::size_t>(pad));
    for (std::size_t i = 0; i < map.size(); ++i)
        map[i] = mirror_index(static_cast<long>(i) - pad, static_cast<long>(n));
    return map;
}

}  // namespace trapan::detail
