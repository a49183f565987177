#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace spce {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a parent seed and a path of
// counters, e.g. derive_seed(master, {replicate, fold}). Same inputs always
// give the same seed, so work can be fanned out in any order.
inline std::uint64_t derive_seed(std::uint64_t parent,
                                 std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = mix64(parent);
    for (auto p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace spce
