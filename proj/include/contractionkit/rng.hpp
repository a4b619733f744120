#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace contractionkit {

/// Deterministic 64-bit generator (splitmix64). Chosen over std:: distributions so that
/// streams are bit-identical across standard-library implementations; seeded sweeps and
/// simulation outputs must not depend on the toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Log-uniform on [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) {
        if (!(lo > 0.0) || !(hi > lo)) {
            throw std::invalid_argument("log_uniform requires 0 < lo < hi");
        }
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    /// Independent substream for (seed, index) pairs; workers drawing point k of a sweep
    /// get identical values regardless of how points are partitioned.
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        Rng mix(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
        mix.next_u64();
        return mix;
    }

private:
    std::uint64_t state_;
};

}  // namespace contractionkit
