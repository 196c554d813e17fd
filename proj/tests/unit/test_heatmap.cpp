#include <gtest/gtest.h>

#include "cervdx/heatmap.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cervdx;

namespace {

BinaryGrid with_blocks(int h, int w, const std::vector<std::array<int, 4>>& blocks) {
    BinaryGrid g(h, w, 0);
    for (const auto& b : blocks) fixture::fill_rect<std::uint8_t>(g, b[0], b[1], b[2], b[3], 1);
    return g;
}

std::vector<std::vector<oracle::Cell>> cells_of(const BinaryGrid& g) {
    std::vector<std::vector<oracle::Cell>> out;
    for (const auto& r : connected_components(g)) {
        std::vector<oracle::Cell> c;
        for (const auto& p : r.pixels) c.push_back({p.y, p.x});
        out.push_back(c);
    }
    return out;
}

}  // namespace

TEST(Heatmap, EmptyMaskGivesZeros) {
    EXPECT_EQ(generate_heatmap(BinaryGrid(32, 32, 0)), HeatGrid(32, 32, 0.0f));
}

TEST(Heatmap, SingleComponentClosedForm) {
    const auto g = with_blocks(200, 200, {{98, 98, 102, 102}});  // 25 px centered at (100, 100)
    const HeatField f = HeatField::from_regions(connected_components(g), {});
    EXPECT_NEAR(f(100, 100), 5.0, 1e-12);
    EXPECT_NEAR(f(100, 107.5), 5.0 * std::exp(-0.5), 1e-12);
    const auto grid = generate_heatmap(g);
    EXPECT_NEAR(grid(100, 100), 5.0, 1e-6);
}

TEST(Heatmap, ComponentsBelowFloorContributeNothing) {
    const auto g = with_blocks(40, 40, {{5, 5, 7, 7}});  // 9 px
    EXPECT_EQ(generate_heatmap(g), HeatGrid(40, 40, 0.0f));
    const auto g10 = with_blocks(40, 40, {{5, 5, 7, 7}, {8, 5, 8, 5}});  // 10 px
    EXPECT_GT(generate_heatmap(g10)(6, 6), 0.0f);
}

TEST(Heatmap, TwoComponentsMatchDirectSum) {
    // 16 px near (50, 50) and 100 px near (50, 58), separated by the empty column 52.
    BinaryGrid g(120, 120, 0);
    fixture::fill_rect<std::uint8_t>(g, 48, 48, 51, 51, 1);
    fixture::fill_rect<std::uint8_t>(g, 45, 53, 54, 62, 1);
    const auto comps = cells_of(g);
    ASSERT_EQ(comps.size(), 2u);
    const auto grid = generate_heatmap(g);
    for (int y = 0; y < 120; y += 3) {
        for (int x = 0; x < 120; x += 3) {
            const double want = oracle::heat_at(comps, 1.5, 10, y, x);
            EXPECT_NEAR(grid(y, x), want, 1e-6 * std::max(1.0, want));
        }
    }
}

TEST(Heatmap, PeakNearCentroid) {
    const auto g = with_blocks(100, 100, {{30, 40, 37, 52}});
    const auto grid = generate_heatmap(g);
    const auto it = std::max_element(grid.data().begin(), grid.data().end());
    const auto idx = static_cast<int>(it - grid.data().begin());
    EXPECT_NEAR(idx / 100, 33.5, 0.5);
    EXPECT_NEAR(idx % 100, 46.0, 0.5);
    EXPECT_LE(*it, std::sqrt(8.0 * 13.0) + 1e-5);
}

TEST(Heatmap, MonotoneAlongRays) {
    const auto g = with_blocks(120, 120, {{55, 55, 64, 64}});
    const HeatField f = HeatField::from_regions(connected_components(g), {});
    for (double ang = 0.0; ang < 2 * M_PI; ang += 0.3) {
        double prev = f(59.5, 59.5);
        for (double r = 0.5; r < 60.0; r += 0.5) {
            const double v = f(59.5 + r * std::sin(ang), 59.5 + r * std::cos(ang));
            EXPECT_LE(v, prev);
            prev = v;
        }
    }
}

TEST(Heatmap, UnionOfSeparatedComponentsIsExactSum) {
    const auto a = with_blocks(150, 150, {{10, 10, 20, 25}});
    const auto b = with_blocks(150, 150, {{100, 90, 112, 97}});
    const auto both = with_blocks(150, 150, {{10, 10, 20, 25}, {100, 90, 112, 97}});
    const auto ha = generate_heatmap(a), hb = generate_heatmap(b), hab = generate_heatmap(both);
    for (std::size_t i = 0; i < hab.size(); ++i) ASSERT_EQ(hab.data()[i], ha.data()[i] + hb.data()[i]);
}

TEST(Heatmap, DoublingSigmaScaleDoublesHalfWidth) {
    const auto g = with_blocks(60, 60, {{28, 28, 31, 31}});  // 16 px at (29.5, 29.5)
    const auto regions = connected_components(g);
    const HeatField f1 = HeatField::from_regions(regions, {1.5, 10});
    const HeatField f2 = HeatField::from_regions(regions, {3.0, 10});
    EXPECT_DOUBLE_EQ(f1(29.5, 29.5), f2(29.5, 29.5));
    EXPECT_NEAR(f1(29.5, 29.5 + 6.0), 4.0 * std::exp(-0.5), 1e-12);
    EXPECT_NEAR(f2(29.5, 29.5 + 12.0), 4.0 * std::exp(-0.5), 1e-12);
}

TEST(Heatmap, InvalidParams) {
    EXPECT_THROW(generate_heatmap(BinaryGrid(4, 4, 0), {0.0, 10}), Error);
    EXPECT_THROW(generate_heatmap(BinaryGrid(4, 4, 0), {1.5, 0}), Error);
}
