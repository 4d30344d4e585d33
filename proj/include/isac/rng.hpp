#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace isac {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derive an independent stream seed from a base seed and a list of salts
/// (tag, sweep index, seed index, ...). Used so that parallel Monte Carlo
/// trials never share a generator stream.
inline std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> salts) {
    std::uint64_t s = base;
    std::uint64_t out = splitmix64(s);
    for (std::uint64_t salt : salts) {
        s ^= salt + 0x9E3779B97F4A7C15ull + (out << 6) + (out >> 2);
        out = splitmix64(s);
    }
    return out;
}

/// Seeded complex Gaussian source. Box-Muller on top of mt19937_64 uniforms,
/// so the sample stream is identical across platforms and standard libraries.
class GaussianGen {
public:
    explicit GaussianGen(std::uint64_t seed) : rng_(seed) {}

    /// One draw of circularly-symmetric complex noise with total variance
    /// `variance` (variance/2 per real dimension).
    std::complex<double> complex_normal(double variance) {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1)) * std::sqrt(variance / 2.0);
        const double th = 2.0 * M_PI * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

    std::uint64_t raw() { return rng_(); }

private:
    double uniform01() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0, 1)
    }
    std::mt19937_64 rng_;
};

}  // namespace isac
