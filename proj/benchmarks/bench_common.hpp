#pragma once

#include "reefseg/prep.hpp"
#include "reefseg/random.hpp"

namespace bench {

// Pixels drawn from a few colour clusters, roughly like a reef mosaic.
inline reefseg::SampleMatrix clustered(std::size_t n, std::size_t d, std::uint64_t seed = 1) {
    reefseg::SplitMix64 rng(seed);
    reefseg::SampleMatrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double centre = static_cast<double>(rng.below(5)) * 0.25;
        for (std::size_t j = 0; j < d; ++j) m(i, j) = centre + 0.2 * (rng.uniform() - 0.5);
    }
    return m;
}

}  // namespace bench
