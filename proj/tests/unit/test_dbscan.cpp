#include <algorithm>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reefseg/cluster/dbscan.hpp"
#include "reefseg/cluster/grid_index.hpp"
#include "reefseg/error.hpp"

using namespace reefseg;

TEST(Dbscan, PairAndOutlier) {
    const auto m = SampleMatrix::from_rows({{0}, {0.5}, {10}});
    const auto fit = dbscan_fit(m, 1.0, 2);
    EXPECT_EQ(fit.labels, (std::vector<int>{0, 0, kNoise}));
    EXPECT_EQ(fit.cluster_count, 1u);
}

TEST(Dbscan, IdenticalPointsFormOneCoreCluster) {
    const auto m = SampleMatrix::from_rows({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
    const auto fit = dbscan_fit(m, 0.1, 4);
    for (int l : fit.labels) EXPECT_EQ(l, 0);
    for (auto c : fit.core_flags) EXPECT_EQ(c, 1);
}

TEST(Dbscan, UniformSquareMatchesBruteForce) {
    SplitMix64 rng(200);
    const auto m = oracle::random_matrix(rng, 200, 2);
    EXPECT_EQ(dbscan_fit(m, 0.1, 4).labels, oracle::dbscan(m, 0.1, 4));
}

TEST(Dbscan, RandomInstancesMatchBruteForce) {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng.below(300), d = 1 + rng.below(4);
        const auto m = oracle::random_matrix(rng, n, d);
        const double eps = 0.02 + rng.uniform() * 0.4;
        const std::size_t min_pts = 1 + rng.below(8);
        const auto fit = dbscan_fit(m, eps, min_pts);
        ASSERT_EQ(fit.labels, oracle::dbscan(m, eps, min_pts)) << "trial " << trial;
        // Every cluster contains a core sample; every core sample is dense.
        for (std::size_t c = 0; c < fit.cluster_count; ++c) {
            bool has_core = false;
            for (std::size_t i = 0; i < n; ++i) has_core |= fit.labels[i] == static_cast<int>(c) && fit.core_flags[i];
            EXPECT_TRUE(has_core);
        }
    }
}

TEST(Dbscan, Errors) {
    const auto m = SampleMatrix::from_rows({{0}});
    EXPECT_THROW(dbscan_fit(m, 0.0, 2), ContractError);
    EXPECT_THROW(dbscan_fit(m, -1.0, 2), ContractError);
}

TEST(Dbscan, SuggestedParametersArePositiveAndDeterministic) {
    SplitMix64 rng(5);
    const auto m = oracle::random_matrix(rng, 500, 3);
    const auto a = suggest_dbscan_params(m, 0, 1);
    const auto b = suggest_dbscan_params(m, 0, 1);
    EXPECT_EQ(a.min_pts, 6u);
    EXPECT_GT(a.eps, 0.0);
    EXPECT_EQ(a.eps, b.eps);
}

TEST(GridIndex, CoveringRadiusReturnsEverything) {
    SplitMix64 rng(1);
    const auto m = oracle::random_matrix(rng, 50, 2);
    const GridIndex index(m, 2.0);
    const auto all = index.query(m.row(7), 2.0);
    EXPECT_EQ(all.size(), 50u);
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
}

TEST(GridIndex, FarQueryIsEmpty) {
    SplitMix64 rng(2);
    const auto m = oracle::random_matrix(rng, 50, 2);
    const GridIndex index(m, 0.1);
    const std::vector<double> far{100.0, -100.0};
    EXPECT_TRUE(index.query(far, 0.1).empty());
}

TEST(GridIndex, MatchesLinearScan) {
    SplitMix64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 1 + rng.below(4);
        const auto m = oracle::random_matrix(rng, 100 + rng.below(200), d, 3.0);
        const double eps = 0.05 + rng.uniform();
        const GridIndex index(m, eps);
        for (std::size_t q = 0; q < m.n; q += 17) {
            std::vector<std::size_t> expected;
            for (std::size_t i = 0; i < m.n; ++i) {
                if (oracle::sq_dist(m, q, i) <= eps * eps) expected.push_back(i);
            }
            EXPECT_EQ(index.query(m.row(q), eps), expected);
        }
    }
}

TEST(GridIndex, DimensionMismatch) {
    const auto m = SampleMatrix::from_rows({{0, 0}});
    const GridIndex index(m, 1.0);
    const std::vector<double> point{0.0};
    EXPECT_THROW(index.query(point, 1.0), ContractError);
}
