#pragma once

#include <cstdint>

namespace reefseg {

/// SplitMix64 stream. The library draws all randomness from this generator so
/// seeded results are identical across standard libraries and platforms
/// (std::*_distribution is implementation-defined).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Lemire-free modulo; bias is negligible for
    /// the bounds used here (sample counts) and the result is reproducible.
    std::uint64_t below(std::uint64_t bound) noexcept { return bound == 0 ? 0 : next() % bound; }

    /// Independent child stream, e.g. one per restart.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept {
        SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
        return mix.next();
    }

private:
    std::uint64_t state_;
};

}  // namespace reefseg
