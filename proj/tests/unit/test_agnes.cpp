#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reefseg/cluster/agnes.hpp"
#include "reefseg/cluster/kmeans.hpp"
#include "reefseg/error.hpp"

using namespace reefseg;

TEST(Agnes, TwoSeparatedPairs) {
    const auto m = SampleMatrix::from_rows({{0}, {1}, {10}, {11}});
    const auto fit = agnes_fit(m, 2);
    EXPECT_EQ(fit.labels, (std::vector<int>{0, 0, 1, 1}));
}

TEST(Agnes, KEqualsNGivesSingletons) {
    const auto m = SampleMatrix::from_rows({{3}, {1}, {2}});
    EXPECT_EQ(agnes_fit(m, 3).labels, (std::vector<int>{0, 1, 2}));
}

TEST(Agnes, SixPointsAgreeWithKMeans) {
    const auto m = SampleMatrix::from_rows({{0}, {0.1}, {0.2}, {10}, {10.1}, {10.2}});
    const auto h = agnes_fit(m, 2);
    const auto k = kmeans_fit(m, 2);
    EXPECT_TRUE(oracle::same_partition(h.labels, k.labels));
}

TEST(Agnes, MergeHeightsMatchNaiveAgglomeration) {
    SplitMix64 rng(8);
    const std::pair<Linkage, oracle::Link> links[] = {
        {Linkage::Ward, oracle::Link::Ward},
        {Linkage::Complete, oracle::Link::Complete},
        {Linkage::Average, oracle::Link::Average},
    };
    for (int trial = 0; trial < 15; ++trial) {
        const auto m = oracle::random_matrix(rng, 5 + rng.below(30), 1 + rng.below(3));
        for (auto [linkage, link] : links) {
            AgnesConfig cfg;
            cfg.linkage = linkage;
            const auto fit = agnes_fit(m, 1, cfg);
            const auto expected = oracle::naive_agnes_heights(m, link);
            ASSERT_EQ(fit.dendrogram.merges.size(), expected.size());
            for (std::size_t i = 0; i < expected.size(); ++i) {
                EXPECT_NEAR(fit.dendrogram.merges[i].height, expected[i], 1e-9) << to_string(linkage);
                if (i > 0) EXPECT_GE(fit.dendrogram.merges[i].height, fit.dendrogram.merges[i - 1].height);
            }
            EXPECT_EQ(fit.dendrogram.merges.back().size, m.n);
        }
    }
}

TEST(Agnes, CutGivesExactlyKClustersInFirstOccurrenceOrder) {
    SplitMix64 rng(9);
    const auto m = oracle::random_matrix(rng, 40, 2);
    const auto fit = agnes_fit(m, 1);
    for (std::size_t k = 1; k <= m.n; ++k) {
        const auto labels = fit.dendrogram.cut(k);
        std::set<int> distinct(labels.begin(), labels.end());
        EXPECT_EQ(distinct.size(), k);
        int next = 0;
        for (int l : labels) {
            EXPECT_LE(l, next);
            if (l == next) ++next;
        }
    }
}

TEST(Agnes, CapAndRangeErrors) {
    SplitMix64 rng(10);
    const auto m = oracle::random_matrix(rng, 30, 2);
    AgnesConfig cfg;
    cfg.max_samples = 29;
    EXPECT_THROW(agnes_fit(m, 2, cfg), ContractError);
    EXPECT_THROW(agnes_fit(m, 0), ContractError);
    EXPECT_THROW(agnes_fit(m, 31), ContractError);
    EXPECT_EQ(parse_linkage("average"), Linkage::Average);
    EXPECT_THROW(parse_linkage("single"), ContractError);
}
