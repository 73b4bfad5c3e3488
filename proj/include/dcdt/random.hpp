#pragma once

#include <cstdint>
#include <random>

namespace dcdt {

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b = 0) {
    return mix_seed(mix_seed(mix_seed(parent) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

/// Portable random source. The engine output of std::mt19937_64 is fixed by
/// the standard; the distributions below are written out so that draws are
/// identical on every platform (std:: distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), n > 0, without modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform() < p); }

    /// Box-Muller; one value per call so the stream position is predictable.
    double normal(double mean = 0.0, double sigma = 1.0);

    /// Knuth multiplication method; fine for the small rates used here.
    int poisson(double rate);

private:
    std::mt19937_64 engine_;
};

}  // namespace dcdt
