#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "reefseg/prep.hpp"

namespace reefseg {

enum class Linkage { Ward, Complete, Average };

Linkage parse_linkage(std::string_view name);
std::string_view to_string(Linkage linkage);

/// One agglomeration step. Cluster ids follow the usual convention: 0..n-1
/// are singletons, merge t creates id n+t.
struct Merge {
    std::size_t a = 0;
    std::size_t b = 0;
    double height = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::size_t n = 0;
    std::vector<Merge> merges;  ///< n-1 entries, non-decreasing height

    /// Flat partition after the first n-k merges. Label ids follow the
    /// first occurrence of each cluster in row order.
    std::vector<int> cut(std::size_t k) const;
};

struct AgnesConfig {
    Linkage linkage = Linkage::Ward;
    std::size_t max_samples = 20000;
};

struct AgnesResult {
    Dendrogram dendrogram;
    std::vector<int> labels;
};

/// Agglomerative nesting with the nearest-neighbour-chain algorithm.
/// Ward keeps O(n) memory by merging centroids, which reproduces the
/// Lance–Williams Ward recurrence on Euclidean distances; complete and
/// average linkage keep the condensed O(n²) distance matrix.
/// Throws ContractError if k is out of range or n exceeds cfg.max_samples.
AgnesResult agnes_fit(const SampleMatrix& m, std::size_t k, const AgnesConfig& cfg = {});

}  // namespace reefseg
