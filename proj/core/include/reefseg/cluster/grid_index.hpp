#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "reefseg/prep.hpp"

namespace reefseg {

/// Uniform grid over the rows of a SampleMatrix with cubic cells of edge
/// `cell`. A radius-`cell` query only needs the 3^d cells around the query.
class GridIndex {
public:
    /// Keeps a reference to `m`; the matrix must outlive the index.
    GridIndex(const SampleMatrix& m, double cell);

    double cell() const noexcept { return cell_; }
    std::size_t dims() const noexcept { return matrix_->d; }
    std::size_t occupied_cells() const noexcept { return cells_.size(); }

    /// Indices of all rows within Euclidean distance ≤ eps of `point`,
    /// ascending. Throws ContractError on dimension mismatch or eps > cell.
    std::vector<std::size_t> query(std::span<const double> point, double eps) const;
    void query(std::span<const double> point, double eps, std::vector<std::size_t>& out) const;

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept;
    };

    std::vector<std::int64_t> key_of(std::span<const double> point) const;

    const SampleMatrix* matrix_;
    double cell_;
    std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, KeyHash> cells_;
};

}  // namespace reefseg
