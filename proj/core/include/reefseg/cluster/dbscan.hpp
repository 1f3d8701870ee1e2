#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "reefseg/prep.hpp"

namespace reefseg {

struct DbscanResult {
    std::vector<int> labels;  ///< kNoise for noise
    std::vector<std::uint8_t> core_flags;
    double eps = 0.0;
    std::size_t min_pts = 0;
    std::size_t cluster_count = 0;
};

/// Density-based clustering. Neighbourhoods are closed Euclidean balls that
/// include the sample itself; a sample is core when its neighbourhood holds
/// at least min_pts samples. Clusters are grown breadth-first from cores in
/// row order, so a border sample belongs to the first cluster reaching it.
/// Throws ContractError for eps ≤ 0 or min_pts = 0.
DbscanResult dbscan_fit(const SampleMatrix& m, double eps, std::size_t min_pts);

struct DbscanParams {
    double eps = 0.0;
    std::size_t min_pts = 0;
};

/// Default parameters when the caller supplies none: min_pts = 2·d (or the
/// given value) and eps at the knee of the sorted (min_pts-1)-nearest-
/// neighbour distance curve of a ≤10 000-row seeded subsample.
DbscanParams suggest_dbscan_params(const SampleMatrix& m, std::size_t min_pts, std::uint64_t seed,
                                   std::size_t subsample = 10000);

}  // namespace reefseg
