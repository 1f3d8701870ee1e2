#include "reefseg/prep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "reefseg/error.hpp"

namespace reefseg {

SampleMatrix SampleMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    SampleMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.d) throw ContractError("ragged rows in SampleMatrix::from_rows");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    m.source_width = static_cast<std::uint32_t>(m.n);
    m.source_height = 1;
    return m;
}

Raster median_composite(std::span<const Raster> stack) {
    if (stack.empty()) throw ContractError("median_composite: empty stack");
    const Raster& first = stack.front();
    for (const auto& r : stack) {
        if (r.width != first.width || r.height != first.height || r.bands != first.bands) {
            throw ContractError("median_composite: shape mismatch in stack");
        }
    }
    Raster out(first.width, first.height, first.bands);
    const std::size_t n = first.pixel_count();
    std::vector<float> values;
    values.reserve(stack.size());
    for (std::size_t p = 0; p < n; ++p) {
        const bool any_valid = std::any_of(stack.begin(), stack.end(), [p](const Raster& r) { return r.valid(p); });
        if (!any_valid) {
            out.invalidate(p);
            continue;
        }
        for (std::uint32_t b = 0; b < first.bands; ++b) {
            values.clear();
            for (const auto& r : stack) {
                if (r.valid(p)) values.push_back(r.at(b, p));
            }
            std::sort(values.begin(), values.end());
            const std::size_t mid = values.size() / 2;
            out.at(b, p) = values.size() % 2 == 1
                               ? values[mid]
                               : static_cast<float>((static_cast<double>(values[mid - 1]) + values[mid]) / 2.0);
        }
    }
    return out;
}

Raster stack_bands(std::span<const Raster> parts) {
    if (parts.empty()) throw ContractError("stack_bands: no input rasters");
    const auto w = parts.front().width;
    const auto h = parts.front().height;
    std::uint32_t bands = 0;
    for (const auto& r : parts) {
        if (r.width != w || r.height != h) {
            throw ContractError("stack_bands: dimension mismatch (" + std::to_string(w) + "x" + std::to_string(h) +
                                " vs " + std::to_string(r.width) + "x" + std::to_string(r.height) + ")");
        }
        bands += r.bands;
    }
    Raster out(w, h, bands);
    std::uint32_t next = 0;
    for (const auto& r : parts) {
        for (std::uint32_t b = 0; b < r.bands; ++b, ++next) {
            std::copy(r.band(b).begin(), r.band(b).end(), out.band(next).begin());
        }
    }
    for (std::size_t p = 0; p < out.pixel_count(); ++p) {
        const bool valid = std::all_of(parts.begin(), parts.end(), [p](const Raster& r) { return r.valid(p); });
        if (!valid) out.invalidate(p);
    }
    return out;
}

NormalizedSamples normalize(const SampleMatrix& m, Normalization scheme) {
    if (m.n == 0) throw ContractError("normalize: empty sample matrix");
    NormalizedSamples result{m, std::vector<FeatureAffine>(m.d)};
    for (std::size_t j = 0; j < m.d; ++j) {
        FeatureAffine affine;
        if (scheme == Normalization::MinMax) {
            double lo = m(0, j);
            double hi = m(0, j);
            for (std::size_t i = 1; i < m.n; ++i) {
                lo = std::min(lo, m(i, j));
                hi = std::max(hi, m(i, j));
            }
            affine = {lo, hi - lo};
        } else {
            double sum = 0.0;
            for (std::size_t i = 0; i < m.n; ++i) sum += m(i, j);
            const double mean = sum / static_cast<double>(m.n);
            double ss = 0.0;
            for (std::size_t i = 0; i < m.n; ++i) ss += (m(i, j) - mean) * (m(i, j) - mean);
            affine = {mean, std::sqrt(ss / static_cast<double>(m.n))};
        }
        result.affine[j] = affine;
        for (std::size_t i = 0; i < m.n; ++i) {
            double y = affine.forward(m(i, j));
            // (x - lo) / (hi - lo) can round a hair past the unit interval.
            if (scheme == Normalization::MinMax) y = std::clamp(y, 0.0, 1.0);
            result.samples(i, j) = y;
        }
    }
    return result;
}

SampleMatrix to_samples(const Raster& r) {
    const std::size_t valid = r.valid_count();
    if (valid == 0) throw ContractError("to_samples: raster has no valid pixels");
    SampleMatrix m(valid, r.bands);
    m.source_width = r.width;
    m.source_height = r.height;
    std::size_t row = 0;
    for (std::size_t p = 0; p < r.pixel_count(); ++p) {
        if (!r.valid(p)) continue;
        for (std::uint32_t b = 0; b < r.bands; ++b) m(row, b) = static_cast<double>(r.at(b, p));
        m.index_map[row] = p;
        ++row;
    }
    return m;
}

LabelMap from_labels(std::span<const int> labels, const SampleMatrix& m, std::uint32_t w, std::uint32_t h) {
    if (labels.size() != m.n) {
        throw ContractError("from_labels: " + std::to_string(labels.size()) + " labels for " + std::to_string(m.n) +
                            " samples");
    }
    LabelMap out(w, h, kInvalid);
    for (std::size_t i = 0; i < m.n; ++i) {
        if (m.index_map[i] >= out.size()) throw ContractError("from_labels: index_map exceeds grid");
        out.labels[m.index_map[i]] = labels[i];
    }
    return out;
}

Raster downsample(const Raster& r, std::uint32_t factor) {
    if (factor == 0) throw ContractError("downsample: factor must be >= 1");
    if (factor == 1) return r;
    const std::uint32_t w = (r.width + factor - 1) / factor;
    const std::uint32_t h = (r.height + factor - 1) / factor;
    Raster out(w, h, r.bands);
    std::vector<double> sums(r.bands);
    for (std::uint32_t ty = 0; ty < h; ++ty) {
        for (std::uint32_t tx = 0; tx < w; ++tx) {
            std::fill(sums.begin(), sums.end(), 0.0);
            std::size_t count = 0;
            for (std::uint32_t y = ty * factor; y < std::min(r.height, (ty + 1) * factor); ++y) {
                for (std::uint32_t x = tx * factor; x < std::min(r.width, (tx + 1) * factor); ++x) {
                    const std::size_t p = std::size_t{y} * r.width + x;
                    if (!r.valid(p)) continue;
                    ++count;
                    for (std::uint32_t b = 0; b < r.bands; ++b) sums[b] += r.at(b, p);
                }
            }
            const std::size_t q = std::size_t{ty} * w + tx;
            if (count == 0) {
                out.invalidate(q);
                continue;
            }
            for (std::uint32_t b = 0; b < r.bands; ++b) {
                out.at(b, q) = static_cast<float>(sums[b] / static_cast<double>(count));
            }
        }
    }
    return out;
}

LabelMap upsample_labels(const LabelMap& coarse, std::uint32_t factor, std::uint32_t w, std::uint32_t h,
                         std::span<const std::uint8_t> full_mask) {
    if (factor == 0) throw ContractError("upsample_labels: factor must be >= 1");
    if (full_mask.size() != std::size_t{w} * h) throw ContractError("upsample_labels: mask size mismatch");
    if (coarse.width != (w + factor - 1) / factor || coarse.height != (h + factor - 1) / factor) {
        throw ContractError("upsample_labels: coarse grid does not match factor");
    }
    LabelMap out(w, h, kInvalid);
    for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
            const std::size_t p = std::size_t{y} * w + x;
            if (full_mask[p]) out.labels[p] = coarse(x / factor, y / factor);
        }
    }
    return out;
}

}  // namespace reefseg
