#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fiberdet {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded random source. The distributions are implemented here rather than
// with <random> adaptors because the standard leaves their algorithms
// unspecified; mt19937_64 itself is fully specified, so streams are identical
// across compilers and library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    // Independent child stream (e.g. one per image). Depends only on the
    // parent's seed and the index, never on how much the parent has consumed,
    // so per-image work can run in any order or in parallel.
    Rng child(std::uint64_t index) const {
        return Rng(splitmix64(seed_ ^ splitmix64(index + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Inclusive range. Modulo bias is negligible against 2^64.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    // Box-Muller. u1 is shifted into (0, 1] so log() stays finite.
    double normal(double mean, double stddev) {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform01();
        return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace fiberdet
