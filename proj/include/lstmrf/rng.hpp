#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace lstmrf {

/// Seeded generator used everywhere randomness is needed.
///
/// Raw mt19937_64 output is mapped to doubles and index ranges by hand so
/// that sequences do not depend on the standard library's distribution
/// implementations. Substreams (one per tree, per grid combination, ...)
/// are derived with Rng::derive so parallel and serial execution see the
/// same draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53 random bits.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Uniform in {0, 1, ..., n-1} via multiply-high (no modulo bias).
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    /// Standard normal via Box-Muller (two uniforms per call, no cached spare).
    double next_normal() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Deterministic substream seed for (seed, stream). SplitMix64 finalizer.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace lstmrf
