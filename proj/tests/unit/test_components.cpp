#include <gtest/gtest.h>

#include <random>

#include "cervdx/components.hpp"
#include "oracles.hpp"

using namespace cervdx;

namespace {

std::set<std::set<oracle::Cell>> as_partition(const std::vector<Region>& regions) {
    std::set<std::set<oracle::Cell>> out;
    for (const auto& r : regions) {
        std::set<oracle::Cell> s;
        for (const auto& p : r.pixels) s.insert({p.y, p.x});
        out.insert(s);
    }
    return out;
}

}  // namespace

TEST(ConnectedComponents, EmptyGridHasNoRegions) {
    EXPECT_TRUE(connected_components(BinaryGrid(8, 8, 0)).empty());
}

TEST(ConnectedComponents, TwoBlocks) {
    BinaryGrid g(10, 10, 0);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 3; ++x) {
            g(1 + y, 1 + x) = 1;
            g(6 + y, 5 + x) = 1;
        }
    }
    const auto r = connected_components(g);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].area(), 9);
    EXPECT_EQ(r[1].area(), 9);
    EXPECT_DOUBLE_EQ(r[0].centroid.y, 2.0);
    EXPECT_DOUBLE_EQ(r[1].centroid.x, 6.0);
    EXPECT_EQ(r[1].bbox.min_y, 6);
    EXPECT_EQ(r[1].bbox.max_x, 7);
}

TEST(ConnectedComponents, DiagonalNeighboursDependOnConnectivity) {
    BinaryGrid g(2, 2, 0);
    g(0, 0) = 1;
    g(1, 1) = 1;
    EXPECT_EQ(connected_components(g, Connectivity::eight).size(), 1u);
    EXPECT_EQ(connected_components(g, Connectivity::four).size(), 2u);
}

TEST(ConnectedComponents, OrderedByCentroidYThenX) {
    BinaryGrid g(5, 9, 0);
    g(2, 8) = 1;
    g(2, 0) = 1;
    g(0, 4) = 1;
    const auto r = connected_components(g);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].pixels[0], (Pixel{0, 4}));
    EXPECT_EQ(r[1].pixels[0], (Pixel{2, 0}));
    EXPECT_EQ(r[2].pixels[0], (Pixel{2, 8}));
}

TEST(ConnectedComponents, MatchesFloodFillOnRandomGrids) {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::uint8_t> cells(16 * 16);
        const double density = 0.2 + 0.5 * (trial % 5) / 4.0;
        std::bernoulli_distribution on(density);
        for (auto& c : cells) c = on(rng);
        const BinaryGrid g(16, 16, cells);
        for (bool eight : {false, true}) {
            const auto regions = connected_components(g, eight ? Connectivity::eight : Connectivity::four);
            ASSERT_EQ(as_partition(regions), oracle::flood_fill_partition(cells, 16, 16, eight));
        }
    }
}

TEST(Region, CentroidInsideBox) {
    BinaryGrid g(12, 12, 0);
    for (int i = 0; i < 10; ++i) g(i, i) = 1;
    const auto r = connected_components(g);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_GE(r[0].centroid.y, r[0].bbox.min_y);
    EXPECT_LE(r[0].centroid.y, r[0].bbox.max_y);
    EXPECT_DOUBLE_EQ(r[0].centroid.x, 4.5);
}
