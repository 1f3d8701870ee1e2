#include "reefseg/cluster/agnes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "reefseg/error.hpp"

namespace reefseg {
namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

// Merge between two slots; a slot is named by its lowest original member.
struct SlotMerge {
    std::size_t a;
    std::size_t b;
    double height;
};

// Cluster distances addressed by slot. Implementations differ in how the
// merged cluster's distances are produced.
class WardCentroids {
public:
    explicit WardCentroids(const SampleMatrix& m)
        : d_(m.d), centroids_(m.values), sizes_(m.n, 1) {}

    double distance(std::size_t a, std::size_t b) const {
        double s = 0.0;
        const double* ca = centroids_.data() + a * d_;
        const double* cb = centroids_.data() + b * d_;
        for (std::size_t j = 0; j < d_; ++j) {
            const double diff = ca[j] - cb[j];
            s += diff * diff;
        }
        const double na = static_cast<double>(sizes_[a]);
        const double nb = static_cast<double>(sizes_[b]);
        return std::sqrt(2.0 * na * nb / (na + nb) * s);
    }

    // Folds slot `gone` into slot `keep`.
    void merge(std::size_t keep, std::size_t gone, const std::vector<std::size_t>&) {
        const double nk = static_cast<double>(sizes_[keep]);
        const double ng = static_cast<double>(sizes_[gone]);
        double* ck = centroids_.data() + keep * d_;
        const double* cg = centroids_.data() + gone * d_;
        for (std::size_t j = 0; j < d_; ++j) ck[j] = (nk * ck[j] + ng * cg[j]) / (nk + ng);
        sizes_[keep] += sizes_[gone];
    }

    std::size_t size(std::size_t slot) const { return sizes_[slot]; }

private:
    std::size_t d_;
    std::vector<double> centroids_;
    std::vector<std::size_t> sizes_;
};

class CondensedMatrix {
public:
    CondensedMatrix(const SampleMatrix& m, Linkage linkage) : n_(m.n), linkage_(linkage), sizes_(m.n, 1) {
        dist_.resize(n_ * (n_ - 1) / 2);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                double s = 0.0;
                for (std::size_t t = 0; t < m.d; ++t) {
                    const double diff = m(i, t) - m(j, t);
                    s += diff * diff;
                }
                dist_[index(i, j)] = std::sqrt(s);
            }
        }
    }

    double distance(std::size_t a, std::size_t b) const { return dist_[a < b ? index(a, b) : index(b, a)]; }

    void merge(std::size_t keep, std::size_t gone, const std::vector<std::size_t>& active) {
        const double nk = static_cast<double>(sizes_[keep]);
        const double ng = static_cast<double>(sizes_[gone]);
        for (std::size_t other : active) {
            if (other == keep || other == gone) continue;
            const double dk = distance(keep, other);
            const double dg = distance(gone, other);
            const double updated = linkage_ == Linkage::Complete ? std::max(dk, dg) : (nk * dk + ng * dg) / (nk + ng);
            dist_[keep < other ? index(keep, other) : index(other, keep)] = updated;
        }
        sizes_[keep] += sizes_[gone];
    }

    std::size_t size(std::size_t slot) const { return sizes_[slot]; }

private:
    std::size_t index(std::size_t i, std::size_t j) const { return n_ * i - i * (i + 1) / 2 + (j - i - 1); }

    std::size_t n_;
    Linkage linkage_;
    std::vector<std::size_t> sizes_;
    std::vector<double> dist_;
};

// Nearest-neighbour chain. Ties prefer the previous chain element (which
// guarantees termination), then the lowest slot.
template <typename Distances>
std::vector<SlotMerge> nn_chain(std::size_t n, Distances& dist) {
    std::vector<SlotMerge> merges;
    merges.reserve(n - 1);
    std::vector<std::size_t> active(n);
    std::iota(active.begin(), active.end(), std::size_t{0});
    std::vector<std::size_t> chain;
    chain.reserve(n);

    while (active.size() > 1) {
        if (chain.empty()) chain.push_back(active.front());
        std::size_t a = 0;
        std::size_t b = 0;
        double ab = 0.0;
        while (true) {
            a = chain.back();
            const bool has_prev = chain.size() >= 2;
            const std::size_t prev = has_prev ? chain[chain.size() - 2] : 0;
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_slot = a;
            for (std::size_t other : active) {
                if (other == a) continue;
                const double value = dist.distance(a, other);
                if (value < best) {
                    best = value;
                    best_slot = other;
                }
            }
            if (has_prev && dist.distance(a, prev) <= best) best_slot = prev;
            if (has_prev && best_slot == prev) {
                b = prev;
                ab = dist.distance(a, prev);
                break;
            }
            chain.push_back(best_slot);
        }
        chain.pop_back();
        chain.pop_back();
        const std::size_t keep = std::min(a, b);
        const std::size_t gone = std::max(a, b);
        merges.push_back({keep, gone, ab});
        dist.merge(keep, gone, active);
        active.erase(std::lower_bound(active.begin(), active.end(), gone));
    }
    return merges;
}

Dendrogram to_dendrogram(std::size_t n, std::vector<SlotMerge> merges) {
    std::stable_sort(merges.begin(), merges.end(),
                     [](const SlotMerge& x, const SlotMerge& y) { return x.height < y.height; });
    Dendrogram dendrogram;
    dendrogram.n = n;
    dendrogram.merges.reserve(merges.size());
    DisjointSets sets(n);
    std::vector<std::size_t> cluster_id(n);
    std::iota(cluster_id.begin(), cluster_id.end(), std::size_t{0});
    std::vector<std::size_t> sizes(n, 1);
    for (std::size_t t = 0; t < merges.size(); ++t) {
        const std::size_t ra = sets.find(merges[t].a);
        const std::size_t rb = sets.find(merges[t].b);
        const std::size_t ia = cluster_id[ra];
        const std::size_t ib = cluster_id[rb];
        const std::size_t size = sizes[ra] + sizes[rb];
        dendrogram.merges.push_back({std::min(ia, ib), std::max(ia, ib), merges[t].height, size});
        sets.unite(ra, rb);
        const std::size_t root = sets.find(ra);
        cluster_id[root] = n + t;
        sizes[root] = size;
    }
    return dendrogram;
}

}  // namespace

Linkage parse_linkage(std::string_view name) {
    if (name == "ward") return Linkage::Ward;
    if (name == "complete") return Linkage::Complete;
    if (name == "average") return Linkage::Average;
    throw ContractError("unknown linkage '" + std::string(name) + "'");
}

std::string_view to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::Ward: return "ward";
        case Linkage::Complete: return "complete";
        case Linkage::Average: return "average";
    }
    return "ward";
}

std::vector<int> Dendrogram::cut(std::size_t k) const {
    if (k == 0 || k > n) throw ContractError("dendrogram cut: k out of range");
    // Cluster ids >= n refer to earlier merges; map each id to a representative singleton.
    std::vector<std::size_t> representative(n + merges.size());
    std::iota(representative.begin(), representative.begin() + static_cast<std::ptrdiff_t>(n), std::size_t{0});
    DisjointSets sets(n);
    for (std::size_t t = 0; t < merges.size(); ++t) {
        representative[n + t] = representative[merges[t].a];
        if (t < n - k) sets.unite(representative[merges[t].a], representative[merges[t].b]);
    }
    std::vector<int> labels(n, -1);
    std::vector<int> root_label(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = sets.find(i);
        if (root_label[root] < 0) root_label[root] = next++;
        labels[i] = root_label[root];
    }
    return labels;
}

AgnesResult agnes_fit(const SampleMatrix& m, std::size_t k, const AgnesConfig& cfg) {
    if (k == 0 || k > m.n) {
        throw ContractError("AGNES: k = " + std::to_string(k) + " outside [1, " + std::to_string(m.n) + "]");
    }
    if (m.n > cfg.max_samples) {
        throw ContractError("AGNES: " + std::to_string(m.n) + " samples exceed the cap of " +
                            std::to_string(cfg.max_samples) + "; downsample the raster first");
    }
    AgnesResult result;
    if (m.n == 1) {
        result.dendrogram.n = 1;
        result.labels = {0};
        return result;
    }
    std::vector<SlotMerge> merges;
    if (cfg.linkage == Linkage::Ward) {
        WardCentroids dist(m);
        merges = nn_chain(m.n, dist);
    } else {
        CondensedMatrix dist(m, cfg.linkage);
        merges = nn_chain(m.n, dist);
    }
    result.dendrogram = to_dendrogram(m.n, std::move(merges));
    result.labels = result.dendrogram.cut(k);
    return result;
}

}  // namespace reefseg
