#pragma once

#include <cstdint>
#include <random>

namespace semcom {

// splitmix64 finalizer; decorrelates nearby seeds.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic substream derivation: every consumer of randomness owns a
// stream id, so experiment cells can run in any order (or in parallel) and
// still reproduce bit-identical results.
inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    return mix64(master ^ mix64(stream));
}

inline std::mt19937_64 make_rng(uint64_t master, uint64_t stream) {
    return std::mt19937_64(derive_seed(master, stream));
}

} // namespace semcom
