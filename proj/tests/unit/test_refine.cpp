#include <map>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reefseg/error.hpp"
#include "reefseg/refine.hpp"

using namespace reefseg;

namespace {

LabelMap grid(std::uint32_t w, std::uint32_t h, std::vector<int> labels) {
    LabelMap lm(w, h);
    lm.labels = std::move(labels);
    return lm;
}

LabelMap random_grid(SplitMix64& rng, int labels, int sentinel_percent) {
    const auto w = static_cast<std::uint32_t>(1 + rng.below(16));
    const auto h = static_cast<std::uint32_t>(1 + rng.below(16));
    LabelMap lm(w, h);
    // Blocky fields so that components have a mix of sizes.
    const int block = 1 + static_cast<int>(rng.below(4));
    std::map<std::pair<int, int>, int> field;
    for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
            const auto key = std::make_pair(static_cast<int>(x) / block, static_cast<int>(y) / block);
            if (!field.count(key)) field[key] = static_cast<int>(rng.below(static_cast<std::uint64_t>(labels)));
            int l = field[key];
            if (rng.below(100) < 15) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(labels)));
            if (static_cast<int>(rng.below(100)) < sentinel_percent) l = rng.below(2) ? kInvalid : kNoise;
            lm(x, y) = l;
        }
    }
    return lm;
}

}  // namespace

TEST(Components, HandTraceable) {
    const auto cc = connected_components(grid(2, 2, {0, 0, 0, 1}), Connectivity::Four);
    ASSERT_EQ(cc.components.size(), 2u);
    EXPECT_EQ(cc.components[0].size, 3u);
    EXPECT_EQ(cc.components[1].size, 1u);
    EXPECT_EQ(cc.components[1].first_pixel, 3u);
}

TEST(Components, CheckerboardFourVersusEight) {
    LabelMap lm(4, 4);
    for (std::uint32_t y = 0; y < 4; ++y) {
        for (std::uint32_t x = 0; x < 4; ++x) lm(x, y) = static_cast<int>((x + y) % 2);
    }
    EXPECT_EQ(connected_components(lm, Connectivity::Four).components.size(), 16u);
    EXPECT_EQ(connected_components(lm, Connectivity::Eight).components.size(), 2u);
}

TEST(Components, SentinelsExcludedAndIdsOrderedByFirstPixel) {
    const auto cc = connected_components(grid(3, 1, {kInvalid, 5, kNoise}), Connectivity::Eight);
    ASSERT_EQ(cc.components.size(), 1u);
    EXPECT_EQ(cc.ids, (std::vector<int>{-1, 0, -1}));
    EXPECT_EQ(cc.components[0].min_x, 1u);
    SplitMix64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto lm = random_grid(rng, 3, 10);
        const auto c = connected_components(lm, Connectivity::Eight);
        for (std::size_t i = 1; i < c.components.size(); ++i) {
            EXPECT_LT(c.components[i - 1].first_pixel, c.components[i].first_pixel);
        }
    }
}

TEST(MergeSmall, SurroundedPixelJoinsField) {
    LabelMap lm(5, 5, 0);
    lm(2, 2) = 1;
    const auto out = merge_small_components(lm, 2, Connectivity::Eight);
    for (int l : out.labels) EXPECT_EQ(l, 0);
}

TEST(MergeSmall, MinSizeOneIsIdentity) {
    SplitMix64 rng(2);
    const auto lm = random_grid(rng, 4, 10);
    EXPECT_EQ(merge_small_components(lm, 1, Connectivity::Four), lm);
}

TEST(MergeSmall, TwoAdjacentSingletons) {
    LabelMap lm(5, 5, 0);
    lm(1, 2) = 1;
    lm(2, 2) = 2;
    const auto out = merge_small_components(lm, 2, Connectivity::Four);
    EXPECT_EQ(out, oracle::merge_fixed_point(lm, 2, 4));
    for (int l : out.labels) EXPECT_EQ(l, 0);
}

TEST(MergeSmall, SentinelEnclosedIslandKept) {
    auto lm = grid(3, 3, {kInvalid, kInvalid, kInvalid, kInvalid, 4, kInvalid, kInvalid, kInvalid, kInvalid});
    EXPECT_EQ(merge_small_components(lm, 5, Connectivity::Eight), lm);
}

TEST(MergeSmall, ModalTieGoesToLowestLabel) {
    // The centre pixel borders two 3s and two 7s under 4-connectivity.
    const auto lm = grid(3, 3, {9, 3, 9, 7, 5, 7, 9, 3, 9});
    const auto out = merge_small_components(lm, 2, Connectivity::Four);
    EXPECT_EQ(out, oracle::merge_fixed_point(lm, 2, 4));
}

TEST(MergeSmall, MatchesFixedPointOracleOnRandomGrids) {
    SplitMix64 rng(3);
    for (int trial = 0; trial < 150; ++trial) {
        const auto lm = random_grid(rng, 2 + static_cast<int>(rng.below(4)), static_cast<int>(rng.below(20)));
        const std::size_t min_size = 1 + rng.below(10);
        const auto conn = rng.below(2) ? Connectivity::Four : Connectivity::Eight;
        const auto out = merge_small_components(lm, min_size, conn);
        ASSERT_EQ(out, oracle::merge_fixed_point(lm, min_size, static_cast<int>(conn))) << "trial " << trial;

        // Afterwards every small component is fenced in by sentinels.
        const auto cc = connected_components(out, conn);
        for (std::size_t c = 0; c < cc.components.size(); ++c) {
            if (cc.components[c].size >= min_size) continue;
            const int w = static_cast<int>(out.width), h = static_cast<int>(out.height);
            for (int p = 0; p < w * h; ++p) {
                if (cc.ids[p] != static_cast<int>(c)) continue;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (conn == Connectivity::Four && dx != 0 && dy != 0) continue;
                        const int x = p % w + dx, y = p / w + dy;
                        if (x < 0 || y < 0 || x >= w || y >= h) continue;
                        const int q = y * w + x;
                        EXPECT_TRUE(cc.ids[q] == static_cast<int>(c) || is_sentinel(out.labels[q]));
                    }
                }
            }
        }
    }
}

TEST(MergeSmall, SentinelsNeverChange) {
    SplitMix64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto lm = random_grid(rng, 3, 25);
        const auto out = merge_small_components(lm, 4, Connectivity::Eight);
        for (std::size_t p = 0; p < lm.size(); ++p) {
            if (is_sentinel(lm.labels[p])) EXPECT_EQ(out.labels[p], lm.labels[p]);
            else EXPECT_FALSE(is_sentinel(out.labels[p]));
        }
    }
}

TEST(Remap, Examples) {
    const auto lm = grid(4, 1, {3, 1, 3, 0});
    EXPECT_EQ(remap_labels(lm, {{3, 1}}).labels, (std::vector<int>{1, 1, 1, 0}));
    EXPECT_EQ(remap_labels(lm, {}), lm);
    const auto ocean = grid(5, 1, {4, 5, 6, 0, 2});
    EXPECT_EQ(remap_labels(ocean, {{4, 0}, {5, 0}, {6, 0}}).labels, (std::vector<int>{0, 0, 0, 0, 2}));
}

TEST(Remap, OnePassNotTransitive) {
    const auto lm = grid(2, 1, {1, 2});
    EXPECT_EQ(remap_labels(lm, {{1, 2}, {2, 3}}).labels, (std::vector<int>{2, 3}));
}

TEST(Remap, Errors) {
    const auto lm = grid(2, 1, {1, 2});
    EXPECT_THROW(remap_labels(lm, {{9, 1}}), ContractError);
    EXPECT_THROW(remap_labels(lm, {{1, 1}}), ContractError);
    EXPECT_THROW(remap_labels(lm, {{1, 2}, {1, 0}}), ContractError);
    EXPECT_THROW(remap_labels(lm, {{1, kNoise}}), ContractError);
}

TEST(Remap, ConservesPixelCountsPerTarget) {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto lm = random_grid(rng, 6, 10);
        const auto present = lm.distinct_labels();
        std::vector<Remap> mapping;
        for (int l : present) {
            if (rng.below(2)) {
                const int to = static_cast<int>(rng.below(8));
                if (to != l) mapping.push_back({l, to});
            }
        }
        std::map<int, int> table;
        for (auto r : mapping) table[r.from] = r.to;
        std::map<int, std::size_t> expected, got;
        for (int l : lm.labels) expected[table.count(l) ? table[l] : l]++;
        for (int l : remap_labels(lm, mapping).labels) got[l]++;
        EXPECT_EQ(got, expected);
    }
}

TEST(Compact, Examples) {
    auto [dense, table] = compact(grid(4, 1, {7, 0, 4, 7}));
    EXPECT_EQ(dense.labels, (std::vector<int>{0, 1, 2, 0}));
    EXPECT_EQ(table, (std::map<int, int>{{7, 0}, {0, 1}, {4, 2}}));

    auto [same, identity] = compact(grid(3, 1, {0, 1, 2}));
    EXPECT_EQ(same.labels, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(identity, (std::map<int, int>{{0, 0}, {1, 1}, {2, 2}}));

    auto [sentinels, empty] = compact(grid(2, 1, {kNoise, kInvalid}));
    EXPECT_TRUE(empty.empty());
    EXPECT_EQ(sentinels.labels, (std::vector<int>{kNoise, kInvalid}));
}

TEST(Compact, PreservesPartition) {
    SplitMix64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        auto lm = random_grid(rng, 9, 10);
        for (int& l : lm.labels) {
            if (!is_sentinel(l)) l *= 3;
        }
        const auto [dense, table] = compact(lm);
        EXPECT_TRUE(oracle::same_partition(lm.labels, dense.labels));
    }
}

TEST(Legend, PresetsCoverPaperClasses) {
    const auto benthic = legend_from_preset({0, 1, 2}, benthic_preset());
    ASSERT_EQ(benthic.size(), 3u);
    EXPECT_EQ(benthic[0].class_name, "ocean");
    EXPECT_EQ(benthic[1].class_name, "sand");
    EXPECT_EQ(benthic[2].class_name, "rock/rubble");
    const auto geo = legend_from_preset({0, 1, 2, 3}, geomorphic_preset());
    EXPECT_EQ(geo[0].class_name, "reef flat");
    EXPECT_EQ(geo[1].class_name, "lagoon/plateau");
    EXPECT_EQ(geo[2].class_name, "reef slope");
    EXPECT_EQ(geo[3].class_name, "ocean");
    EXPECT_THROW(legend_from_preset({0, 1}, benthic_preset()), ContractError);
}

TEST(Legend, AssignmentContracts) {
    const auto lm = grid(3, 1, {0, 1, 2});
    const auto legend = legend_from_preset({0, 1, 2}, benthic_preset());
    const auto map = assign_legend(lm, legend, {{"method", "gmm"}});
    EXPECT_EQ(map.legend.size(), 3u);
    EXPECT_EQ(map.provenance.at("method"), "gmm");

    try {
        assign_legend(lm, {legend[0], legend[2]});
        FAIL() << "expected LegendError";
    } catch (const LegendError& e) {
        EXPECT_EQ(e.uncovered(), (std::vector<int>{1}));
    }
    EXPECT_THROW(assign_legend(lm, {legend[0], legend[1], legend[2], legend[0]}), ContractError);

    // Entries for labels that no longer occur are dropped.
    auto extra = legend;
    extra.push_back({9, "spare", {1, 2, 3}});
    EXPECT_EQ(assign_legend(lm, extra).legend.size(), 3u);
}

TEST(Legend, JsonRoundTripAndShape) {
    const auto legend = legend_from_preset({0, 1, 2}, benthic_preset());
    const auto text = legend_to_json(legend);
    EXPECT_NE(text.find("\"class\": \"ocean\""), std::string::npos);
    EXPECT_NE(text.find("\"color\": \"#0B3C8C\""), std::string::npos);
    EXPECT_EQ(legend_from_json(text), legend);
}

TEST(Legend, RelabelFollowsCompactTable) {
    const auto legend = std::vector<LegendEntry>{{4, "a", {}}, {9, "b", {}}};
    const auto moved = relabel_legend(legend, {{4, 1}, {9, 0}});
    ASSERT_EQ(moved.size(), 2u);
    EXPECT_EQ(moved[0].label, 0);
    EXPECT_EQ(moved[0].class_name, "b");
}
