#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reefseg/label_map.hpp"
#include "reefseg/raster.hpp"

namespace reefseg {

/// Valid pixels flattened to an n×d row-major feature matrix, plus each
/// row's pixel index (row-major) in the source grid.
struct SampleMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> values;
    std::vector<std::size_t> index_map;
    std::uint32_t source_width = 0;
    std::uint32_t source_height = 0;

    SampleMatrix() = default;
    SampleMatrix(std::size_t rows, std::size_t dims) : n(rows), d(dims), values(rows * dims, 0.0), index_map(rows) {
        for (std::size_t i = 0; i < rows; ++i) index_map[i] = i;
    }

    /// Builds a matrix from literal rows, index_map = 0..n-1. Test and tooling helper.
    static SampleMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::span<const double> row(std::size_t i) const { return {values.data() + i * d, d}; }
    std::span<double> row(std::size_t i) { return {values.data() + i * d, d}; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * d + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * d + j]; }
};

enum class Normalization { MinMax, ZScore };

/// y = (x - offset) / scale, or 0 where scale == 0 (constant feature).
/// The inverse x = offset + y·scale recovers the constant for degenerate features.
struct FeatureAffine {
    double offset = 0.0;
    double scale = 1.0;

    double forward(double x) const { return scale == 0.0 ? 0.0 : (x - offset) / scale; }
    double inverse(double y) const { return offset + y * scale; }
};

struct NormalizedSamples {
    SampleMatrix samples;
    std::vector<FeatureAffine> affine;  ///< one per feature
};

/// Per-pixel, per-band median over the inputs that are valid at that pixel.
/// Even counts average the two middle values. A pixel is valid iff it is
/// valid in at least one input.
Raster median_composite(std::span<const Raster> stack);

/// Concatenates bands in the given order; the output mask is the AND of all
/// input masks.
Raster stack_bands(std::span<const Raster> parts);

/// Column-wise scaling. MinMax maps onto [0,1]; ZScore uses the population
/// standard deviation. Constant columns map to 0 in both schemes.
NormalizedSamples normalize(const SampleMatrix& m, Normalization scheme);

/// One row per valid pixel in row-major order, d = bands.
SampleMatrix to_samples(const Raster& r);

/// Scatters per-row labels back onto a w×h grid; pixels absent from
/// index_map receive kInvalid.
LabelMap from_labels(std::span<const int> labels, const SampleMatrix& m, std::uint32_t w, std::uint32_t h);

/// Block-mean pooling over factor×factor tiles using valid samples only.
/// Output is ceil(w/f)×ceil(h/f); tiles with no valid pixel are invalid.
Raster downsample(const Raster& r, std::uint32_t factor);

/// Nearest-neighbour expansion of a label map computed on a downsampled grid
/// back onto a (w, h) grid: pixel (x, y) takes the label of tile
/// (x/f, y/f). Pixels invalid in `full_mask` become kInvalid.
LabelMap upsample_labels(const LabelMap& coarse, std::uint32_t factor, std::uint32_t w, std::uint32_t h,
                         std::span<const std::uint8_t> full_mask);

}  // namespace reefseg
