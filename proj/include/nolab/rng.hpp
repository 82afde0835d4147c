#pragma once

#include <cstdint>
#include <random>

namespace nolab {

// splitmix64; used to derive independent seed streams from a master seed.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(mix64(master) ^ mix64(stream + 0x51ed270b4d2cbf3bULL));
}

using Rng = std::mt19937_64;

}  // namespace nolab
