#include "reefseg/cluster/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "reefseg/error.hpp"
#include "reefseg/parallel.hpp"
#include "reefseg/random.hpp"

namespace reefseg {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

void check_k(const SampleMatrix& m, std::size_t k) {
    if (k == 0) throw ContractError("k-means: k must be at least 1");
    if (k > m.n) {
        throw ContractError("k-means: k = " + std::to_string(k) + " exceeds sample count " + std::to_string(m.n));
    }
}

// Nearest centroid per sample with its squared distance; returns the total.
double assign(const SampleMatrix& m, std::span<const double> centroids, std::size_t k, std::vector<int>& labels,
              std::vector<double>& distances) {
    labels.resize(m.n);
    distances.resize(m.n);
    parallel_for(m.n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto x = m.row(i);
            int best = 0;
            double best_d = squared_distance(x, centroids.subspan(0, m.d));
            for (std::size_t c = 1; c < k; ++c) {
                const double dist = squared_distance(x, centroids.subspan(c * m.d, m.d));
                if (dist < best_d) {
                    best_d = dist;
                    best = static_cast<int>(c);
                }
            }
            labels[i] = best;
            distances[i] = best_d;
        }
    });
    double total = 0.0;
    for (double dist : distances) total += dist;
    return total;
}

// Means of the current partition; returns per-cluster counts.
std::vector<std::size_t> update_means(const SampleMatrix& m, const std::vector<int>& labels, std::size_t k,
                                      std::vector<double>& centroids) {
    std::vector<double> sums(k * m.d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < m.n; ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        ++counts[c];
        const auto x = m.row(i);
        for (std::size_t j = 0; j < m.d; ++j) sums[c * m.d + j] += x[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (std::size_t j = 0; j < m.d; ++j) {
            centroids[c * m.d + j] = sums[c * m.d + j] / static_cast<double>(counts[c]);
        }
    }
    return counts;
}

std::vector<double> kmeanspp_seed(const SampleMatrix& m, std::size_t k, SplitMix64& rng) {
    std::vector<double> centroids(k * m.d);
    auto place = [&](std::size_t c, std::size_t i) {
        std::copy_n(m.row(i).begin(), m.d, centroids.begin() + static_cast<std::ptrdiff_t>(c * m.d));
    };
    place(0, rng.below(m.n));
    std::vector<double> nearest(m.n);
    for (std::size_t i = 0; i < m.n; ++i) nearest[i] = squared_distance(m.row(i), {centroids.data(), m.d});
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : nearest) total += v;
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double cumulative = 0.0;
            chosen = m.n - 1;
            for (std::size_t i = 0; i < m.n; ++i) {
                cumulative += nearest[i];
                if (cumulative > target && nearest[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = rng.below(m.n);
        }
        place(c, chosen);
        const std::span<const double> added(centroids.data() + c * m.d, m.d);
        for (std::size_t i = 0; i < m.n; ++i) nearest[i] = std::min(nearest[i], squared_distance(m.row(i), added));
    }
    return centroids;
}

KMeansResult lloyd(const SampleMatrix& m, std::vector<double> centroids, std::size_t k, const KMeansConfig& cfg) {
    KMeansResult result;
    auto& model = result.model;
    model.k = k;
    model.d = m.d;

    std::vector<int> labels;
    std::vector<double> distances;
    double current = assign(m, centroids, k, labels, distances);
    model.wcss_history.push_back(current);

    std::vector<int> next_labels;
    std::vector<std::uint8_t> used(m.n);
    for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
        const auto counts = update_means(m, labels, k, centroids);

        // Reseed emptied clusters at the samples farthest from their centroid.
        std::fill(used.begin(), used.end(), 0);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < m.n; ++i) {
                if (!used[i] && distances[i] > far_d) {
                    far_d = distances[i];
                    far = i;
                }
            }
            used[far] = 1;
            std::copy_n(m.row(far).begin(), m.d, centroids.begin() + static_cast<std::ptrdiff_t>(c * m.d));
        }

        const double next = assign(m, centroids, k, next_labels, distances);
        model.iterations = iter + 1;
        model.wcss_history.push_back(next);
        const bool stable = next_labels == labels;
        const bool small_gain = current - next <= cfg.tol * current;
        labels.swap(next_labels);
        current = next;
        if (stable) {
            model.converged = true;
            break;
        }
        if (small_gain) break;
    }

    if (!model.converged) {
        // Stopped on tolerance or iteration cap: report centroids that are the
        // means of the returned partition so WCSS matches the labels.
        update_means(m, labels, k, centroids);
        current = wcss(m, labels, centroids);
        model.wcss_history.push_back(current);
    }
    model.centroids = std::move(centroids);
    model.wcss = current;
    result.labels = std::move(labels);
    return result;
}

}  // namespace

double wcss(const SampleMatrix& m, std::span<const int> labels, std::span<const double> centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        total += squared_distance(m.row(i), centroids.subspan(static_cast<std::size_t>(labels[i]) * m.d, m.d));
    }
    return total;
}

std::vector<int> assign_nearest(const SampleMatrix& m, std::span<const double> centroids, std::size_t k) {
    std::vector<int> labels;
    std::vector<double> distances;
    assign(m, centroids, k, labels, distances);
    return labels;
}

KMeansResult kmeans_fit_from(const SampleMatrix& m, std::span<const double> initial_centroids, std::size_t k,
                             const KMeansConfig& cfg) {
    check_k(m, k);
    if (initial_centroids.size() != k * m.d) throw ContractError("k-means: initial centroids must be k x d");
    auto result = lloyd(m, {initial_centroids.begin(), initial_centroids.end()}, k, cfg);
    result.model.restarts_used = 1;
    return result;
}

KMeansResult kmeans_fit(const SampleMatrix& m, std::size_t k, const KMeansConfig& cfg) {
    check_k(m, k);
    const std::size_t restarts = std::max<std::size_t>(cfg.restarts, 1);
    KMeansResult best;
    for (std::size_t r = 0; r < restarts; ++r) {
        SplitMix64 rng(SplitMix64::derive(cfg.seed, r));
        auto run = lloyd(m, kmeanspp_seed(m, k, rng), k, cfg);
        if (r == 0 || run.model.wcss < best.model.wcss) best = std::move(run);
    }
    best.model.restarts_used = restarts;
    return best;
}

KMeansResult kmeans_fit_nested(const SampleMatrix& m, const KMeansResult& previous, const KMeansConfig& cfg) {
    const std::size_t k = previous.model.k + 1;
    check_k(m, k);
    auto best = kmeans_fit(m, k, cfg);

    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        const auto c = static_cast<std::size_t>(previous.labels[i]);
        const double dist = squared_distance(m.row(i), previous.model.centroid(c));
        if (dist > far_d) {
            far_d = dist;
            far = i;
        }
    }
    std::vector<double> start = previous.model.centroids;
    start.insert(start.end(), m.row(far).begin(), m.row(far).end());
    auto extended = lloyd(m, std::move(start), k, cfg);
    if (extended.model.wcss < best.model.wcss) {
        const auto restarts = best.model.restarts_used;
        best = std::move(extended);
        best.model.restarts_used = restarts + 1;
    } else {
        best.model.restarts_used += 1;
    }
    return best;
}

}  // namespace reefseg
