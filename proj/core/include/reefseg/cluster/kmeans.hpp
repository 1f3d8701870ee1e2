#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reefseg/prep.hpp"

namespace reefseg {

struct KMeansConfig {
    std::size_t max_iter = 300;
    double tol = 1e-6;  ///< relative WCSS improvement below which a run stops
    std::size_t restarts = 8;
    std::uint64_t seed = 0;
};

struct KMeansModel {
    std::size_t k = 0;
    std::size_t d = 0;
    std::vector<double> centroids;  ///< k×d row-major
    double wcss = 0.0;
    std::size_t iterations = 0;
    std::size_t restarts_used = 0;
    bool converged = false;  ///< labels reached a fixed point
    /// WCSS after every assignment step of the winning run, ending with `wcss`.
    std::vector<double> wcss_history;

    std::span<const double> centroid(std::size_t c) const { return {centroids.data() + c * d, d}; }
};

struct KMeansResult {
    KMeansModel model;
    std::vector<int> labels;
};

/// Lloyd's algorithm from k-means++ seeding, best of `cfg.restarts` runs by
/// WCSS (ties → earliest restart). Labels use nearest centroid with ties to
/// the lowest cluster index. An emptied cluster is reseeded at the sample
/// farthest from its assigned centroid. Throws ContractError unless 1 ≤ k ≤ n.
KMeansResult kmeans_fit(const SampleMatrix& m, std::size_t k, const KMeansConfig& cfg = {});

/// A single Lloyd run from the given k×d starting centroids.
KMeansResult kmeans_fit_from(const SampleMatrix& m, std::span<const double> initial_centroids, std::size_t k,
                             const KMeansConfig& cfg = {});

/// Fit with k+1 clusters whose WCSS never exceeds `previous.model.wcss`:
/// the best-of-restarts fit is compared against one extra run started from
/// the previous centroids plus the sample farthest from them.
KMeansResult kmeans_fit_nested(const SampleMatrix& m, const KMeansResult& previous, const KMeansConfig& cfg = {});

/// Total within-cluster sum of squares for fixed labels and centroids.
double wcss(const SampleMatrix& m, std::span<const int> labels, std::span<const double> centroids);

/// Nearest-centroid labels (ties → lowest index).
std::vector<int> assign_nearest(const SampleMatrix& m, std::span<const double> centroids, std::size_t k);

}  // namespace reefseg
