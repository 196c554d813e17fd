#include <gtest/gtest.h>

#include "cervdx/herniation.hpp"
#include "cervdx/kang.hpp"
#include "cervdx/labeling.hpp"
#include "cervdx/phantom.hpp"
#include "fixtures.hpp"

using namespace cervdx;

namespace {

KangAssessment assess(const phantom::Phantom& ph, std::array<bool, 5> hyper = {}) {
    const auto imap = label_instances(ph.case_data.mask);
    const auto hern = extract_herniation(imap, ph.case_data.orientation);
    return kang_assessment(imap, hern, ph.case_data.image.spacing_mm, ph.case_data.orientation, hyper);
}

phantom::Phantom bump(double depth, AnteriorSide side = AnteriorSide::left) {
    phantom::PhantomSpec spec;
    spec.anterior_side = side;
    spec.herniations.push_back({2, depth, 6.0, 0.0});
    return phantom::generate(spec);
}

}  // namespace

TEST(StenosisRatio, FormulaPoints) {
    EXPECT_DOUBLE_EQ(stenosis_ratio_percent(4.0, 4.0), 0.0);
    EXPECT_DOUBLE_EQ(stenosis_ratio_percent(0.0, 4.0), 100.0);
    EXPECT_DOUBLE_EQ(stenosis_ratio_percent(2.0, 0.5 * (5.0 + 3.0)), 50.0);
    try {
        (void)stenosis_ratio_percent(1.0, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("reference degenerate"), std::string::npos);
    }
}

TEST(SegmentGrade, RuleTable) {
    EXPECT_EQ(segment_grade(true, 10.0, 3.0, true), 3);
    EXPECT_EQ(segment_grade(true, 100.0, 0.0, false), 2);
    EXPECT_EQ(segment_grade(true, 40.0, 1.0, false), 0);
    EXPECT_EQ(segment_grade(true, 50.0, 1.0, false), 1);
    EXPECT_EQ(segment_grade(false, std::nullopt, std::nullopt, true), 0);
}

TEST(PatientGrade, MaximumOverLevels) {
    auto make = [](std::vector<int> grades) {
        KangAssessment k;
        for (std::size_t i = 0; i < grades.size(); ++i) k.levels[i] = KangLevel{grades[i], {}, {}, false, false};
        return patient_grade(k);
    };
    EXPECT_EQ(make({0, 0, 0, 0, 0}), 0);
    EXPECT_EQ(make({1, 2, 0, 3, 0}), 3);
    EXPECT_EQ(make({1}), 1);
    EXPECT_THROW(patient_grade(KangAssessment{}), Error);
}

TEST(HerniationDistance, ContactIsZero) {
    InstanceMap m(20, 20, 0);
    fixture::fill_rect<std::uint8_t>(m, 0, 10, 19, 14, instance::cord);
    EXPECT_DOUBLE_EQ(herniation_cord_distance_mm(Region::from_pixels({{5, 9}}), m, {0.5, 0.5}), 0.0);
    EXPECT_DOUBLE_EQ(herniation_cord_distance_mm(Region::from_pixels({{5, 8}}), m, {0.5, 0.5}), 1.0);
    EXPECT_DOUBLE_EQ(herniation_cord_distance_mm(Region::from_pixels({{5, 6}}), m, {0.5, 2.0}), 8.0);
}

TEST(KangAssessment, NoHerniationAllZero) {
    const auto k = assess(fixture::plain_phantom(), {true, false, true, false, false});
    for (const auto& l : k.levels) {
        ASSERT_TRUE(l.has_value());
        EXPECT_EQ(l->grade, 0);  // hyperintensity without herniation does not grade
        EXPECT_FALSE(l->herniation);
    }
    EXPECT_EQ(k.patient_grade, 0);
}

TEST(KangAssessment, Branches) {
    EXPECT_EQ(assess(bump(1.0), {false, false, true, false, false}).levels[2]->grade, 3);
    EXPECT_EQ(assess(bump(5.0)).levels[2]->grade, 2);
    const auto mid = assess(bump(3.0));
    EXPECT_EQ(mid.levels[2]->grade, 1);
    EXPECT_GE(*mid.levels[2]->stenosis_ratio_percent, 50.0);
    const auto shallow = assess(bump(0.8));
    EXPECT_EQ(shallow.levels[2]->grade, 0);
    EXPECT_TRUE(shallow.levels[2]->herniation);
    EXPECT_LT(*shallow.levels[2]->stenosis_ratio_percent, 50.0);
}

TEST(KangAssessment, AgreesWithPhantomTruthOnClearCases) {
    for (double depth : {0.8, 3.2, 5.0}) {
        for (auto side : {AnteriorSide::left, AnteriorSide::right}) {
            const auto ph = bump(depth, side);
            EXPECT_EQ(assess(ph).levels[2]->grade, ph.truth.levels[2].expected_grade) << depth;
        }
    }
}

TEST(KangAssessment, MonotoneInBumpDepth) {
    int prev = 0;
    double prev_d = 1e9;
    for (int i = 0; i < 20; ++i) {
        const double depth = 0.6 + 0.25 * i;
        const auto k = assess(bump(depth));
        ASSERT_TRUE(k.levels[2]->herniation) << depth;
        EXPECT_GE(k.levels[2]->grade, prev) << depth;
        EXPECT_LE(*k.levels[2]->d_hern_mm, prev_d) << depth;
        prev = k.levels[2]->grade;
        prev_d = *k.levels[2]->d_hern_mm;
    }
    EXPECT_EQ(prev, 2);
}

TEST(KangAssessment, Grade3ForcesPatientGrade3) {
    phantom::PhantomSpec spec;
    spec.herniations = {{0, 5.0, 6.0, 0.0}, {3, 1.5, 6.0, 0.0}};
    const auto k = assess(phantom::generate(spec), {false, false, false, true, false});
    EXPECT_EQ(k.levels[3]->grade, 3);
    EXPECT_EQ(k.levels[0]->grade, 2);
    EXPECT_EQ(k.patient_grade, 3);
}
