#include "reefseg/cluster/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "reefseg/cluster/grid_index.hpp"
#include "reefseg/detail/knee.hpp"
#include "reefseg/error.hpp"
#include "reefseg/label_map.hpp"
#include "reefseg/parallel.hpp"
#include "reefseg/random.hpp"

namespace reefseg {
namespace {
constexpr int kUnvisited = -3;
}

DbscanResult dbscan_fit(const SampleMatrix& m, double eps, std::size_t min_pts) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ContractError("DBSCAN: eps must be positive");
    if (min_pts == 0) throw ContractError("DBSCAN: min_pts must be at least 1");

    DbscanResult result;
    result.eps = eps;
    result.min_pts = min_pts;
    result.labels.assign(m.n, kUnvisited);
    result.core_flags.assign(m.n, 0);
    if (m.n == 0) return result;

    const GridIndex index(m, eps);
    parallel_for(m.n, [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> neighbours;
        for (std::size_t i = begin; i < end; ++i) {
            index.query(m.row(i), eps, neighbours);
            result.core_flags[i] = neighbours.size() >= min_pts ? 1 : 0;
        }
    });

    std::vector<std::size_t> neighbours;
    std::deque<std::size_t> frontier;
    int cluster = 0;
    for (std::size_t i = 0; i < m.n; ++i) {
        if (result.labels[i] != kUnvisited || !result.core_flags[i]) continue;
        result.labels[i] = cluster;
        frontier.push_back(i);
        while (!frontier.empty()) {
            const std::size_t p = frontier.front();
            frontier.pop_front();
            index.query(m.row(p), eps, neighbours);
            for (std::size_t q : neighbours) {
                if (result.labels[q] != kUnvisited) continue;
                result.labels[q] = cluster;
                if (result.core_flags[q]) frontier.push_back(q);
            }
        }
        ++cluster;
    }
    for (int& label : result.labels) {
        if (label == kUnvisited) label = kNoise;
    }
    result.cluster_count = static_cast<std::size_t>(cluster);
    return result;
}

DbscanParams suggest_dbscan_params(const SampleMatrix& m, std::size_t min_pts, std::uint64_t seed,
                                   std::size_t subsample) {
    if (m.n < 2) throw ContractError("DBSCAN: need at least two samples to suggest eps");
    DbscanParams params;
    params.min_pts = min_pts > 0 ? min_pts : std::max<std::size_t>(2 * m.d, 2);

    std::vector<std::size_t> rows(m.n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (m.n > subsample) {
        SplitMix64 rng(seed);
        for (std::size_t i = 0; i < subsample; ++i) std::swap(rows[i], rows[i + rng.below(m.n - i)]);
        rows.resize(subsample);
        std::sort(rows.begin(), rows.end());
    }

    // Distance to the (min_pts-1)-th nearest other sample.
    const std::size_t rank = std::min(params.min_pts - 1, rows.size() - 1);
    std::vector<double> kth(rows.size(), 0.0);
    parallel_for(rows.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> dist(rows.size());
        for (std::size_t a = begin; a < end; ++a) {
            for (std::size_t b = 0; b < rows.size(); ++b) {
                double s = 0.0;
                for (std::size_t j = 0; j < m.d; ++j) {
                    const double diff = m(rows[a], j) - m(rows[b], j);
                    s += diff * diff;
                }
                dist[b] = s;
            }
            dist[a] = std::numeric_limits<double>::infinity();
            if (rank == 0) {
                kth[a] = 0.0;
                continue;
            }
            std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(rank - 1), dist.end());
            kth[a] = std::sqrt(dist[rank - 1]);
        }
    });
    std::sort(kth.begin(), kth.end());
    std::vector<double> x(kth.size());
    std::iota(x.begin(), x.end(), 0.0);
    const auto knee = detail::chord_knee(x, kth, 0.0);
    double eps = knee ? kth[*knee] : kth[kth.size() / 2];
    if (!(eps > 0.0)) {
        const auto positive = std::upper_bound(kth.begin(), kth.end(), 0.0);
        eps = positive != kth.end() ? *positive : 1e-6;
    }
    params.eps = eps;
    return params;
}

}  // namespace reefseg
