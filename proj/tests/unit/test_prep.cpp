#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "reefseg/error.hpp"
#include "reefseg/prep.hpp"
#include "reefseg/random.hpp"

using namespace reefseg;

namespace {

Raster one_band(std::uint32_t w, std::uint32_t h, std::vector<float> values) {
    Raster r(w, h, 1);
    r.data = std::move(values);
    return r;
}

}  // namespace

TEST(MedianComposite, OddAndEvenCounts) {
    const std::vector<Raster> odd{one_band(1, 1, {5}), one_band(1, 1, {1}), one_band(1, 1, {9})};
    EXPECT_EQ(median_composite(odd).at(0, 0), 5.0f);
    const std::vector<Raster> even{one_band(1, 1, {2}), one_band(1, 1, {4})};
    EXPECT_EQ(median_composite(even).at(0, 0), 3.0f);
}

TEST(MedianComposite, UsesOnlyValidInputs) {
    std::vector<Raster> stack{one_band(2, 1, {1, 7}), one_band(2, 1, {3, 8}), one_band(2, 1, {100, 9})};
    stack[2].invalidate(0);
    for (auto& r : stack) r.invalidate(1);
    const Raster out = median_composite(stack);
    EXPECT_EQ(out.at(0, 0), 2.0f);
    EXPECT_FALSE(out.valid(1));
}

TEST(MedianComposite, PermutationInvariant) {
    SplitMix64 rng(5);
    std::vector<Raster> stack;
    for (int i = 0; i < 5; ++i) {
        Raster r(4, 3, 2);
        for (float& v : r.data) v = static_cast<float>(rng.uniform());
        if (i % 2 == 0) r.invalidate(rng.below(12));
        stack.push_back(r);
    }
    const Raster base = median_composite(stack);
    std::reverse(stack.begin(), stack.end());
    std::swap(stack[0], stack[3]);
    EXPECT_TRUE(bitwise_equal(base, median_composite(stack)));
}

TEST(MedianComposite, Errors) {
    EXPECT_THROW(median_composite(std::vector<Raster>{}), ContractError);
    EXPECT_THROW(median_composite(std::vector<Raster>{Raster(1, 1, 1), Raster(2, 1, 1)}), ContractError);
}

TEST(StackBands, OrderAndMaskAnd) {
    Raster rgb(2, 1, 3);
    for (std::size_t i = 0; i < rgb.data.size(); ++i) rgb.data[i] = static_cast<float>(i);
    Raster depth = one_band(2, 1, {10, 20});
    depth.invalidate(1);
    const std::vector<Raster> parts{rgb, depth};
    const Raster out = stack_bands(parts);
    ASSERT_EQ(out.bands, 4u);
    EXPECT_EQ(out.at(2, 0), rgb.at(2, 0));
    EXPECT_EQ(out.at(3, 0), 10.0f);
    EXPECT_TRUE(out.valid(0));
    EXPECT_FALSE(out.valid(1));
}

TEST(StackBands, SingleIsIdentityAndMismatchFails) {
    const Raster r = one_band(2, 2, {1, 2, 3, 4});
    EXPECT_TRUE(bitwise_equal(stack_bands(std::vector<Raster>{r}), r));
    EXPECT_THROW(stack_bands(std::vector<Raster>{r, Raster(3, 2, 1)}), ContractError);
    EXPECT_THROW(stack_bands(std::vector<Raster>{}), ContractError);
}

TEST(Normalize, MinMaxExamples) {
    const auto m = SampleMatrix::from_rows({{0, 3}, {2, 3}, {4, 3}});
    const auto out = normalize(m, Normalization::MinMax);
    EXPECT_EQ(out.samples(0, 0), 0.0);
    EXPECT_EQ(out.samples(1, 0), 0.5);
    EXPECT_EQ(out.samples(2, 0), 1.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out.samples(i, 1), 0.0);
}

TEST(Normalize, ZScoreUsesPopulationSd) {
    const auto m = SampleMatrix::from_rows({{1}, {3}});
    const auto out = normalize(m, Normalization::ZScore);
    EXPECT_DOUBLE_EQ(out.samples(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(out.samples(1, 0), 1.0);
}

TEST(Normalize, ColumnPropertiesAndInverse) {
    SplitMix64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(200), d = 1 + rng.below(4);
        SampleMatrix m(n, d);
        for (double& v : m.values) v = (rng.uniform() - 0.3) * 50.0;
        const auto mm = normalize(m, Normalization::MinMax);
        for (double v : mm.samples.values) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        const auto z = normalize(m, Normalization::ZScore);
        for (std::size_t j = 0; j < d; ++j) {
            double mean = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += z.samples(i, j);
            mean /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) sq += (z.samples(i, j) - mean) * (z.samples(i, j) - mean);
            EXPECT_LT(std::abs(mean), 1e-9);
            EXPECT_NEAR(std::sqrt(sq / static_cast<double>(n)), 1.0, 1e-9);
            for (std::size_t i = 0; i < n; ++i) {
                EXPECT_NEAR(z.affine[j].inverse(z.samples(i, j)), m(i, j), 1e-9);
                EXPECT_NEAR(mm.affine[j].inverse(mm.samples(i, j)), m(i, j), 1e-9);
            }
        }
    }
}

TEST(ToSamples, FlattenAndMaskFilter) {
    Raster r = one_band(2, 1, {7, 8});
    const auto all = to_samples(r);
    EXPECT_EQ(all.n, 2u);
    EXPECT_EQ(all.d, 1u);
    EXPECT_EQ(all(1, 0), 8.0);
    EXPECT_EQ(all.index_map, (std::vector<std::size_t>{0, 1}));

    r.invalidate(0);
    const auto some = to_samples(r);
    EXPECT_EQ(some.n, 1u);
    EXPECT_EQ(some.index_map, (std::vector<std::size_t>{1}));

    r.invalidate(1);
    EXPECT_THROW(to_samples(r), ContractError);
}

TEST(FromLabels, ScatterAndErrors) {
    SampleMatrix m(2, 1);
    m.index_map = {0, 3};
    const std::vector<int> labels{0, 1};
    const LabelMap lm = from_labels(labels, m, 2, 2);
    EXPECT_EQ(lm.labels, (std::vector<int>{0, kInvalid, kInvalid, 1}));
    const std::vector<int> three{0, 1, 2};
    EXPECT_THROW(from_labels(three, m, 2, 2), ContractError);
}

TEST(FromLabels, RoundTripMarksExactlyTheInvalidPixels) {
    SplitMix64 rng(21);
    Raster r(9, 7, 2);
    for (std::size_t p = 0; p < r.pixel_count(); ++p) {
        if (rng.below(3) == 0) r.invalidate(p);
    }
    r.mask[0] = 1;
    r.data[0] = r.data[r.pixel_count()] = 0.0f;
    const auto m = to_samples(r);
    const std::vector<int> labels(m.n, 4);
    const LabelMap lm = from_labels(labels, m, r.width, r.height);
    for (std::size_t p = 0; p < r.pixel_count(); ++p) EXPECT_EQ(lm.labels[p] == kInvalid, !r.valid(p));
}

TEST(Downsample, Examples) {
    const Raster r = one_band(2, 2, {1, 3, 5, 7});
    EXPECT_TRUE(bitwise_equal(downsample(r, 1), r));
    const Raster d = downsample(r, 2);
    EXPECT_EQ(d.width, 1u);
    EXPECT_EQ(d.at(0, 0), 4.0f);

    Raster gaps = one_band(2, 2, {1, 9, 5, 7});
    gaps.invalidate(0);
    gaps.invalidate(2);
    gaps.invalidate(3);
    EXPECT_EQ(downsample(gaps, 2).at(0, 0), 9.0f);

    Raster empty_block = one_band(2, 1, {0, 0});
    empty_block.invalidate(0);
    empty_block.invalidate(1);
    EXPECT_FALSE(downsample(empty_block, 2).valid(0));
    EXPECT_THROW(downsample(r, 0), ContractError);
}

TEST(Downsample, OutputDimensionsAreCeilings) {
    for (std::uint32_t w = 1; w <= 13; ++w) {
        for (std::uint32_t f = 1; f <= 6; ++f) {
            const Raster d = downsample(Raster(w, 3, 1), f);
            EXPECT_EQ(d.width, (w + f - 1) / f);
            EXPECT_EQ(d.height, (3 + f - 1) / f);
        }
    }
}

TEST(UpsampleLabels, BlocksCopyCoarseLabelOnValidPixels) {
    LabelMap coarse(2, 1);
    coarse.labels = {3, 5};
    std::vector<std::uint8_t> mask(3 * 2, 1);
    mask[4] = 0;
    const LabelMap fine = upsample_labels(coarse, 2, 3, 2, mask);
    EXPECT_EQ(fine.labels, (std::vector<int>{3, 3, 5, 3, kInvalid, 5}));
}
