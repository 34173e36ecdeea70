#pragma once

#include <cstdint>

namespace tracelab {

/// Counter-based uniform random numbers: the value depends only on the key,
/// never on call order, which keeps Monte Carlo sums reproducible under any
/// scheduling.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return mix64(h ^ c);
}

/// Uniform double in the open interval (0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return (static_cast<double>(counter_hash(seed, a, b, c) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace tracelab
