#include <gtest/gtest.h>

#include <random>

#include "cervdx/objectives.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cervdx;

namespace {

SemanticMask random_mask(std::mt19937_64& rng, int h, int w) {
    std::uniform_int_distribution<int> code(0, 4);
    SemanticMask m(h, w, 0);
    for (auto& v : m.data()) v = static_cast<std::uint8_t>(code(rng));
    return m;
}

ProbMaps random_probs(std::mt19937_64& rng, int h, int w) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    ProbMaps p;
    for (auto& c : p.classes) c = Grid<double>(h, w, 0.0);
    for (int i = 0; i < h * w; ++i) {
        double s = 0.0;
        std::array<double, 5> v{};
        for (auto& x : v) s += (x = u(rng));
        for (int c = 0; c < 5; ++c) p.classes[c].data()[i] = v[c] / s;
    }
    return p;
}

HeatGrid random_heat(std::mt19937_64& rng, int h, int w) {
    std::uniform_real_distribution<float> u(0.0f, 5.0f);
    HeatGrid g(h, w, 0.0f);
    for (auto& v : g.data()) v = u(rng);
    return g;
}

double seg_loss_oracle(const ProbMaps& p, const SemanticMask& gt) {
    const std::size_t n = gt.size();
    double ce = 0.0;
    for (std::size_t i = 0; i < n; ++i) ce -= std::log(std::max(p.classes[gt.data()[i]].data()[i], 1e-7));
    ce /= n;
    double dice = 0.0;
    for (int c = 1; c < 5; ++c) {
        double pg = 0.0, ps = 0.0, gs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = gt.data()[i] == c ? 1.0 : 0.0;
            pg += p.classes[c].data()[i] * g;
            ps += p.classes[c].data()[i];
            gs += g;
        }
        dice += 2.0 * pg / (ps + gs + 1e-5);
    }
    return ce + (1.0 - dice / 4.0);
}

double edge_loss_oracle(const SemanticMask& pred, const SemanticMask& gt) {
    const int h = gt.height(), w = gt.width();
    double total = 0.0;
    for (int c = 1; c < 5; ++c) {
        std::vector<std::uint8_t> a(gt.size()), b(gt.size());
        for (std::size_t i = 0; i < gt.size(); ++i) {
            a[i] = pred.data()[i] == c;
            b[i] = gt.data()[i] == c;
        }
        const auto ea = oracle::sobel_magnitude(a, h, w), eb = oracle::sobel_magnitude(b, h, w);
        double s = 0.0;
        for (std::size_t i = 0; i < ea.size(); ++i) s += std::abs(ea[i] - eb[i]);
        total += s / ea.size();
    }
    return 0.25 * total;
}

}  // namespace

TEST(HeatmapLoss, Examples) {
    std::mt19937_64 rng(1);
    const auto a = random_heat(rng, 16, 20);
    EXPECT_EQ(heatmap_loss(a, a), 0.0);
    HeatGrid b = a;
    for (auto& v : b.data()) v += 0.5f;
    EXPECT_NEAR(heatmap_loss(b, a), 0.5, 1e-6);
    const auto c = random_heat(rng, 16, 20);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(double(a.data()[i]) - double(c.data()[i]));
    EXPECT_NEAR(heatmap_loss(a, c), s / a.size(), 1e-9);
    EXPECT_THROW(heatmap_loss(a, HeatGrid(3, 3, 0.0f)), Error);
}

TEST(HeatmapLoss, TriangleInequality) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto a = random_heat(rng, 8, 8), b = random_heat(rng, 8, 8), c = random_heat(rng, 8, 8);
        EXPECT_LE(heatmap_loss(a, c), heatmap_loss(a, b) + heatmap_loss(b, c) + 1e-12);
    }
}

TEST(SegLoss, PerfectPredictionIsZero) {
    std::mt19937_64 rng(3);
    const auto gt = random_mask(rng, 12, 12);
    const auto t = seg_loss_terms(ProbMaps::one_hot(gt), gt);
    EXPECT_NEAR(t.cross_entropy, 0.0, 1e-6);
    EXPECT_NEAR(t.dice_loss, 0.0, 1e-6);
}

TEST(SegLoss, UniformPredictionCrossEntropy) {
    std::mt19937_64 rng(4);
    const auto gt = random_mask(rng, 10, 10);
    EXPECT_NEAR(seg_loss_terms(ProbMaps::uniform(10, 10), gt).cross_entropy, std::log(5.0), 1e-12);
}

TEST(SegLoss, MatchesDirectSummation) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto gt = random_mask(rng, 9, 11);
        const auto p = random_probs(rng, 9, 11);
        EXPECT_NEAR(seg_loss(p, gt), seg_loss_oracle(p, gt), 1e-7);
        const auto t = seg_loss_terms(p, gt);
        EXPECT_GE(t.dice_loss, 0.0);
        EXPECT_LE(t.dice_loss, 1.0);
    }
}

TEST(SobelEdges, ZeroField) {
    EXPECT_EQ(sobel_edges(BinaryGrid(6, 6, 0)), Grid<double>(6, 6, 0.0));
}

TEST(SobelEdges, VerticalStep) {
    BinaryGrid g(8, 8, 0);
    fixture::fill_rect<std::uint8_t>(g, 0, 4, 7, 7, 1);
    const auto e = sobel_edges(g);
    for (int y = 0; y < 8; ++y) {
        EXPECT_DOUBLE_EQ(e(y, 3), 4.0);
        EXPECT_DOUBLE_EQ(e(y, 4), 4.0);
        EXPECT_DOUBLE_EQ(e(y, 0), 0.0);
        EXPECT_DOUBLE_EQ(e(y, 7), 0.0);
    }
}

TEST(SobelEdges, MatchesDirectConvolution) {
    std::mt19937_64 rng(6);
    std::bernoulli_distribution on(0.4);
    BinaryGrid single(7, 7, 0);
    single(3, 3) = 1;
    std::vector<BinaryGrid> cases{single};
    for (int i = 0; i < 30; ++i) {
        BinaryGrid g(13, 17, 0);
        for (auto& v : g.data()) v = on(rng);
        cases.push_back(g);
    }
    for (const auto& g : cases) {
        const auto want = oracle::sobel_magnitude(g.data(), g.height(), g.width());
        const auto got = sobel_edges(g);
        for (std::size_t i = 0; i < want.size(); ++i) ASSERT_NEAR(got.data()[i], want[i], 1e-9);
    }
}

TEST(EdgeLoss, IdenticalArgmaxIsZero) {
    std::mt19937_64 rng(7);
    const auto gt = random_mask(rng, 10, 10);
    EXPECT_EQ(edge_loss(ProbMaps::one_hot(gt), gt), 0.0);
}

TEST(EdgeLoss, ShiftedPredictionMatchesOracle) {
    SemanticMask gt(20, 20, 0);
    fixture::fill_rect<std::uint8_t>(gt, 3, 3, 8, 10, 1);
    fixture::fill_rect<std::uint8_t>(gt, 10, 4, 12, 9, 2);
    fixture::fill_rect<std::uint8_t>(gt, 2, 13, 17, 15, 3);
    SemanticMask shifted(20, 20, 0);
    for (int y = 0; y < 20; ++y) {
        for (int x = 1; x < 20; ++x) shifted(y, x) = gt(y, x - 1);
    }
    const double loss = edge_loss(ProbMaps::one_hot(shifted), gt);
    EXPECT_GT(loss, 0.0);
    EXPECT_NEAR(loss, edge_loss_oracle(shifted, gt), 1e-12);
}

TEST(EdgeLoss, AbsentClassContributesZero) {
    // No CSF anywhere: its term is 0 but the average still divides by four.
    SemanticMask gt(10, 10, 0);
    fixture::fill_rect<std::uint8_t>(gt, 2, 2, 5, 5, 1);
    SemanticMask pred(10, 10, 0);
    fixture::fill_rect<std::uint8_t>(pred, 2, 2, 5, 6, 1);
    EXPECT_NEAR(edge_loss(ProbMaps::one_hot(pred), gt), edge_loss_oracle(pred, gt), 1e-12);
}

TEST(TotalLoss, ReducesAndIsLinear) {
    std::mt19937_64 rng(8);
    const auto gt = random_mask(rng, 12, 12);
    const auto p = random_probs(rng, 12, 12);
    const auto hp = random_heat(rng, 12, 12), ht = random_heat(rng, 12, 12);
    EXPECT_EQ(total_loss(p, gt, hp, ht, {0.0, 0.0}), seg_loss(p, gt));
    const double t0 = total_loss(p, gt, hp, ht, {0.0, 1.0});
    const double t1 = total_loss(p, gt, hp, ht, {1.0, 1.0});
    const double t2 = total_loss(p, gt, hp, ht, {2.0, 1.0});
    EXPECT_NEAR(t2 - t0, 2.0 * (t1 - t0), 1e-12);
    EXPECT_THROW(total_loss(p, gt, hp, ht, {-1.0, 1.0}), Error);
}

TEST(TotalLoss, PerfectPrediction) {
    std::mt19937_64 rng(9);
    const auto gt = random_mask(rng, 16, 16);
    const auto h = random_heat(rng, 16, 16);
    EXPECT_LE(total_loss(ProbMaps::one_hot(gt), gt, h, h, {}), 1e-6);
}

TEST(ProbMaps, ValidateNormalization) {
    EXPECT_NO_THROW(ProbMaps::uniform(3, 3).validate());
    auto p = ProbMaps::uniform(3, 3);
    p.classes[0](1, 1) = 0.5;
    EXPECT_THROW(p.validate(), Error);
}
