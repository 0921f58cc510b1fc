#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cle {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent stream for replicate `index` of a run seeded with `seed`.
// The stream depends only on (seed, index), never on thread layout.
inline Rng replicate_rng(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (index + 1));
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    return Rng(seq);
}

// Uniform on the open interval (0, 1), 53 bits.
inline double uniform_open(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential(Rng& rng) { return -std::log(uniform_open(rng)); }

inline double standard_normal(Rng& rng) {
    // Box-Muller; one variate per call keeps the stream position simple
    const double u = uniform_open(rng);
    const double v = uniform_open(rng);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

}  // namespace cle
