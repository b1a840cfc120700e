// rng.hpp - seeded randomness with a portable seed-splitting rule
//
// Every stochastic stage draws from its own generator whose seed is
// derive_seed(master, stage, trial). The mapping uses only FNV-1a and
// splitmix64, and the variates are built from raw mt19937_64 output, so a
// given master seed replays identically across standard libraries.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

#include "scfdma/types.hpp"

namespace scfdma {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

/// Sub-seed for `stage` of trial `trial` under `master`:
/// splitmix64(splitmix64(master ^ fnv1a(stage)) + trial).
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                                           std::uint64_t trial = 0) {
    return splitmix64(splitmix64(master ^ fnv1a(stage)) + trial);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    /// Standard normal via the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = power.
    cd complex_normal(double power = 1.0) {
        const double s = std::sqrt(power / 2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace scfdma
