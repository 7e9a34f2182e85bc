#pragma once

// Stateless per-trajectory stream derivation: trajectory k draws from an
// mt19937_64 seeded by splitmix64 applied to (master_seed, k). Streams for
// different purposes (couplings vs. two-point runs) use distinct tags so the
// estimates stay independent.

#include <cstdint>
#include <random>

namespace bsyk {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

enum class StreamTag : uint64_t {
    trajectory = 0x51,
    two_point = 0x52,
    bootstrap = 0x53,
};

inline uint64_t derive_seed(uint64_t master_seed, uint64_t index, StreamTag tag) {
    uint64_t s = splitmix64(master_seed ^ (uint64_t(tag) * 0xD6E8FEB86659FD93ull));
    return splitmix64(s ^ ((index + 1) * 0x9E3779B97F4A7C15ull));
}

inline std::mt19937_64 make_stream(uint64_t master_seed, uint64_t index, StreamTag tag) {
    return std::mt19937_64(derive_seed(master_seed, index, tag));
}

}  // namespace bsyk
