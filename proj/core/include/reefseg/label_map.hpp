#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace reefseg {

inline constexpr int kNoise = -1;    ///< DBSCAN noise: clustered, assigned to no cluster.
inline constexpr int kInvalid = -2;  ///< Never clustered: masked or outside the sample set.

inline constexpr bool is_sentinel(int label) noexcept { return label < 0; }

/// Per-pixel cluster assignment aligned with a source raster (row-major,
/// top-left origin). Negative values are sentinels.
struct LabelMap {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<int> labels;

    LabelMap() = default;
    LabelMap(std::uint32_t w, std::uint32_t h, int fill = kInvalid)
        : width(w), height(h), labels(std::size_t{w} * h, fill) {}

    std::size_t size() const noexcept { return labels.size(); }
    int& operator()(std::uint32_t x, std::uint32_t y) { return labels[std::size_t{y} * width + x]; }
    int operator()(std::uint32_t x, std::uint32_t y) const { return labels[std::size_t{y} * width + x]; }

    /// Sorted distinct non-sentinel labels.
    std::vector<int> distinct_labels() const;

    friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

}  // namespace reefseg
