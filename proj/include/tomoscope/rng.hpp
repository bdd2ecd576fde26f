#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace tomoscope::rng {

/// Deterministic 64-bit generator (splitmix64 update). Chosen over
/// std::mt19937 so that streams are reproducible across standard library
/// implementations; the state transition is pure integer arithmetic.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in (0,1), strictly excluding both endpoints so the
    /// Box-Muller logarithm below is always finite.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Standard normal variates via Box-Muller. Pairs are generated together and
/// the second member cached, so the sequence depends only on the seed, never
/// on call grouping.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        const double u1 = rng_.uniform01();
        const double u2 = rng_.uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cache_ = r * std::sin(a);
        has_cache_ = true;
        return r * std::cos(a);
    }

private:
    SplitMix64 rng_;
    bool has_cache_ = false;
    double cache_ = 0.0;
};

/// Independent per-index stream seed. Mixing the index into the master seed
/// (rather than skipping ahead) means changing one index's draw never shifts
/// any other index's draw.
inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master ^ ((index + 1) * 0x9E3779B97F4A7C15ull);
    return SplitMix64(z).next();
}

inline std::vector<double> normal_sequence(std::uint64_t seed, int count) {
    GaussianSampler g(seed);
    std::vector<double> out(static_cast<std::size_t>(count));
    for (auto& v : out) v = g.next();
    return out;
}

} // namespace tomoscope::rng
