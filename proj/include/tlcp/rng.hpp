#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace tlcp {

// Counter-based generator: the SplitMix64 finalizer applied to key + i*GOLDEN,
// where the key is hashed from (seed, purpose tag, stream index).
//
// Draw j of stream (seed, tag, i) is a pure function of those four integers, so
// replicate i's randomness never depends on which worker ran replicates < i.
// That property is what makes the parallel Monte Carlo harness bit-reproducible
// across worker counts.
//
// normal() is plain Box-Muller, cosine branch only, two uniforms per variate
// (no cached second value, so the draw count per variate is fixed).
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0)
        : key_(mix(mix(mix(seed + GOLDEN) ^ fnv1a(purpose)) + GOLDEN * (index + 1))) {}

    std::uint64_t next_u64() { return mix(key_ + (++ctr_) * GOLDEN); }

    // uniform on [0, 1): 53 random mantissa bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]; log is finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mu, double sd) { return mu + sd * normal(); }

    static constexpr std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 1469598103934665603ull;
        for (const char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return h;
    }

private:
    static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ull;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

}  // namespace tlcp
