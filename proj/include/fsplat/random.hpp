#ifndef FSPLAT_RANDOM_HPP
#define FSPLAT_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

namespace fsplat {

/// Deterministic RNG helpers. Distributions are hand-rolled so their output
/// depends only on the mt19937_64 stream, not on the standard library's
/// distribution internals.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t bits() { return engine_(); }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int64_t uniform_int(int64_t n) {  // in [0, n)
        return static_cast<int64_t>(uniform() * static_cast<double>(n));
    }

    /// One standard normal draw via Box-Muller (the second draw is discarded
    /// deliberately so call parity never affects downstream state).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * M_PI * u2);
    }

    std::pair<double, double> normal2() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }

private:
    std::mt19937_64 engine_;
};

/// Mixes a stream tag into a seed so sub-RNGs are decorrelated.
inline uint64_t fork_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace fsplat

#endif
