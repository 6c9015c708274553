#pragma once

#include <cstdint>
#include <string_view>

namespace down {

// Deterministic, platform-independent PRNG primitives. std::uniform_int_distribution
// is implementation-defined, so anything that must be byte-reproducible across
// toolchains goes through these instead.

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Per-query seed: a stable mix of the run seed and the query id.
inline uint64_t derive_seed(uint64_t run_seed, std::string_view query_id) {
    uint64_t state = run_seed ^ fnv1a64(query_id);
    return splitmix64(state);
}

// Unbiased-enough bounded draw via 128-bit multiply-shift (bound is tiny here).
inline uint64_t bounded(uint64_t value, uint64_t bound) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(value) * bound) >> 64);
}

} // namespace down
