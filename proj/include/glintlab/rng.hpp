// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace glintlab {

/// splitmix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v)); }

/// Maps 64 random bits to a double in [0, 1).
constexpr double to_unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Sequential random stream for Monte-Carlo oracles. The engine is
/// std::mt19937_64, whose output sequence is fixed by the standard, and the
/// conversion to doubles is done here so that results are reproducible
/// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    /// Independent substream `stream` of `seed`.
    static Rng substream(std::uint64_t seed, std::uint64_t stream) { return Rng(hash_combine(seed, stream)); }

    double uniform() { return to_unit_double(engine_()); }
    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace glintlab
