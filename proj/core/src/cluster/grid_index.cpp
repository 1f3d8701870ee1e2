#include "reefseg/cluster/grid_index.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reefseg/error.hpp"

namespace reefseg {

std::size_t GridIndex::KeyHash::operator()(const std::vector<std::int64_t>& key) const noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::int64_t v : key) {
        h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
        h *= 0x100000001B3ULL;
    }
    return static_cast<std::size_t>(h);
}

GridIndex::GridIndex(const SampleMatrix& m, double cell) : matrix_(&m), cell_(cell) {
    if (!(cell > 0.0) || !std::isfinite(cell)) throw ContractError("grid index: cell edge must be positive");
    cells_.reserve(m.n);
    for (std::size_t i = 0; i < m.n; ++i) cells_[key_of(m.row(i))].push_back(i);
}

std::vector<std::int64_t> GridIndex::key_of(std::span<const double> point) const {
    std::vector<std::int64_t> key(point.size());
    for (std::size_t j = 0; j < point.size(); ++j) {
        key[j] = static_cast<std::int64_t>(std::floor(point[j] / cell_));
    }
    return key;
}

std::vector<std::size_t> GridIndex::query(std::span<const double> point, double eps) const {
    std::vector<std::size_t> out;
    query(point, eps, out);
    return out;
}

void GridIndex::query(std::span<const double> point, double eps, std::vector<std::size_t>& out) const {
    const std::size_t d = matrix_->d;
    if (point.size() != d) {
        throw ContractError("grid index: query has " + std::to_string(point.size()) + " dimensions, index has " +
                            std::to_string(d));
    }
    if (!(eps > 0.0) || eps > cell_) throw ContractError("grid index: query radius must be in (0, cell edge]");
    out.clear();
    const double eps2 = eps * eps;
    const auto centre = key_of(point);
    std::vector<std::int64_t> key(centre);
    std::vector<int> offset(d, -1);
    // Odometer over {-1, 0, 1}^d.
    while (true) {
        for (std::size_t j = 0; j < d; ++j) key[j] = centre[j] + offset[j];
        if (const auto it = cells_.find(key); it != cells_.end()) {
            for (std::size_t i : it->second) {
                const auto x = matrix_->row(i);
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double diff = x[j] - point[j];
                    s += diff * diff;
                }
                if (s <= eps2) out.push_back(i);
            }
        }
        std::size_t j = 0;
        while (j < d && offset[j] == 1) offset[j++] = -1;
        if (j == d) break;
        ++offset[j];
    }
    std::sort(out.begin(), out.end());
}

}  // namespace reefseg
