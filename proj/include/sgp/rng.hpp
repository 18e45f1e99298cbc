#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sgp {

// Deterministic random stream with a fixed draw discipline: every sampler
// documents how many draws it consumes per call, so paths are reproducible
// across refactors. Distributions are hand-rolled on top of the raw 64-bit
// stream because the standard library distributions do not guarantee a
// fixed draw count.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // One draw. Uniform on [0, 1).
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // One draw. Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Two draws. Standard normal via Box-Muller, no second-value caching.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        // avoid log(0)
        while (u1 == 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::mt19937_64 gen_;
};

// splitmix64 finalizer, used as the documented seed-splitting rule.
inline std::uint64_t mix_u64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Substream derivation: (seed, component-index) -> substream seed.
// Component k of a product process draws from derive_substream(seed, k).
inline std::uint64_t derive_substream(std::uint64_t seed, std::uint64_t index) {
    return mix_u64(mix_u64(seed) ^ mix_u64(index + 0x51ed2701a2b5f3c9ULL));
}

}  // namespace sgp
