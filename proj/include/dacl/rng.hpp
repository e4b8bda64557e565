#pragma once

#include <cstdint>

namespace dacl {

// Decorrelates derived RNG streams from one master seed (splitmix64 step).
inline uint64_t mix_seed(uint64_t seed, uint64_t idx) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (idx + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace dacl
