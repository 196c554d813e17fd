#include <gtest/gtest.h>

#include "cervdx/core.hpp"

using namespace cervdx;

TEST(Grid, StoresRowMajorAndComparesByValue) {
    Grid<int> g(2, 3, 0);
    g(1, 2) = 7;
    EXPECT_EQ(g.data()[5], 7);
    EXPECT_TRUE(g.contains(1, 2));
    EXPECT_FALSE(g.contains(2, 0));
    EXPECT_FALSE(g.contains(0, -1));
    Grid<int> h = g;
    EXPECT_EQ(g, h);
    h(0, 0) = 1;
    EXPECT_NE(g, h);
}

TEST(Grid, RejectsInconsistentData) {
    EXPECT_THROW(Grid<int>(2, 2, std::vector<int>{1, 2, 3}), Error);
    EXPECT_THROW(Grid<int>(-1, 2, 0), Error);
}

TEST(InstanceCodes, MapToSemanticClasses) {
    InstanceMap m(1, 14, 0);
    for (int c = 0; c < 14; ++c) m(0, c) = static_cast<std::uint8_t>(c);
    const SemanticMask s = to_semantic(m);
    const std::vector<std::uint8_t> expected = {0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 4};
    EXPECT_EQ(s.data(), expected);
}

TEST(InstanceCodes, LevelNames) {
    EXPECT_EQ(instance::vertebra(0), 1);
    EXPECT_EQ(instance::disc(4), 11);
    EXPECT_EQ(disc_level_from_name("C4/5"), 2);
    EXPECT_FALSE(disc_level_from_name("C7/T1").has_value());
}

TEST(Orientation, PosteriorSignFollowsAnteriorSide) {
    EXPECT_EQ(Orientation{AnteriorSide::left}.posterior_sign(), 1.0);
    EXPECT_EQ(Orientation{AnteriorSide::right}.posterior_sign(), -1.0);
    EXPECT_EQ(Orientation{AnteriorSide::left}.flipped().anterior_side, AnteriorSide::right);
}

TEST(Validate, UnknownSemanticCodeIsNamed) {
    SemanticMask m(3, 3, 0);
    m(1, 1) = 9;
    try {
        validate(m);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::schema);
        EXPECT_STREQ(e.what(), "unknown semantic code 9");
    }
}

TEST(Validate, CaseDimensionMismatch) {
    Case c;
    c.image.values = Grid<double>(512, 512, 0.0);
    c.mask = SemanticMask(256, 256, 0);
    try {
        validate(c);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
    }
}

TEST(Validate, ImageValuesAndSpacing) {
    IntensityImage img{Grid<double>(2, 2, 1.0), {0.5, 0.5}};
    EXPECT_NO_THROW(validate(img));
    img.values(0, 0) = -1.0;
    EXPECT_THROW(validate(img), Error);
    img.values(0, 0) = 1.0;
    img.spacing_mm.x_mm = 0.0;
    EXPECT_THROW(validate(img), Error);
}

TEST(Validate, HeatGrid) {
    EXPECT_THROW(validate(HeatGrid{}), Error);
    HeatGrid g(2, 2, 0.0f);
    EXPECT_NO_THROW(validate(g));
    g(1, 1) = -0.5f;
    EXPECT_THROW(validate(g), Error);
}
