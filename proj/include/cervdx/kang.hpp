#pragma once

// Rule-based Kang grading per disc level and per patient.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cervdx/components.hpp"
#include "cervdx/core.hpp"
#include "cervdx/herniation.hpp"
#include "cervdx/labeling.hpp"
#include "cervdx/rotated_rect.hpp"

namespace cervdx {

struct StenosisMeasure {
    double ratio_percent = 0.0;
    double d_hern_mm = 0.0;
    double reference_mm = 0.0;  // mean of the two reference distances
};

inline double stenosis_ratio_percent(double d_hern_mm, double reference_mm) {
    if (reference_mm == 0.0) throw Error(ErrorKind::degenerate, "reference degenerate: mean reference distance is 0");
    return (1.0 - d_hern_mm / reference_mm) * 100.0;
}

namespace detail {

inline double physical_distance(Point a, Point b, Spacing s) {
    return std::hypot((a.y - b.y) * s.y_mm, (a.x - b.x) * s.x_mm);
}

inline double nearest_distance_mm(Point p, const Region& target, Spacing s) {
    double best = std::numeric_limits<double>::infinity();
    for (const Pixel& q : target.pixels) {
        best = std::min(best, physical_distance(p, {static_cast<double>(q.y), static_cast<double>(q.x)}, s));
    }
    return best;
}

}  // namespace detail

/// Nearest herniation-to-cord distance in mm; exactly 0 when the two masks
/// overlap or are 8-adjacent.
inline double herniation_cord_distance_mm(const Region& herniation, const InstanceMap& imap, Spacing spacing) {
    const Region cord = instance_region(imap, instance::cord);
    if (cord.area() == 0) throw Error(ErrorKind::anatomy, "spinal cord absent");
    for (const Pixel& p : herniation.pixels) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (imap.contains(p.y + dy, p.x + dx) && imap(p.y + dy, p.x + dx) == instance::cord) return 0.0;
            }
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (const Pixel& p : herniation.pixels) {
        best = std::min(best, detail::nearest_distance_mm({static_cast<double>(p.y), static_cast<double>(p.x)}, cord,
                                                          spacing));
    }
    return best;
}

inline StenosisMeasure stenosis_ratio(const InstanceMap& imap, const Region& hern_component, int level,
                                      Spacing spacing, Orientation orientation) {
    const Region cord = instance_region(imap, instance::cord);
    if (cord.area() == 0) throw Error(ErrorKind::anatomy, "spinal cord absent");
    auto reference = [&](int vertebra_index) {
        const Region v = instance_region(imap, instance::vertebra(vertebra_index));
        if (v.area() == 0) {
            throw Error(ErrorKind::anatomy, "stenosis ratio at " + std::string(kDiscLevelNames[level]) +
                                                ": vertebra " + std::string(kVertebraNames[vertebra_index]) +
                                                " absent");
        }
        const Point mid = posterior_wall_midpoint(min_rotated_rect(v), orientation);
        return detail::nearest_distance_mm(mid, cord, spacing);
    };
    StenosisMeasure m;
    m.d_hern_mm = herniation_cord_distance_mm(hern_component, imap, spacing);
    m.reference_mm = 0.5 * (reference(level) + reference(level + 1));
    m.ratio_percent = stenosis_ratio_percent(m.d_hern_mm, m.reference_mm);
    return m;
}

/// Grade table: no herniation -> 0; T2 hyperintensity -> 3; cord contact -> 2;
/// ratio >= 50% -> 1; otherwise 0.
inline int segment_grade(bool hern_present, std::optional<double> ratio_percent, std::optional<double> d_hern_mm,
                         bool t2_hyper) {
    if (!hern_present) return 0;
    if (t2_hyper) return 3;
    if (!ratio_percent || !d_hern_mm) {
        throw Error(ErrorKind::invalid_argument, "segment grade: herniation present without ratio/distance");
    }
    if (*d_hern_mm == 0.0) return 2;
    if (*ratio_percent >= 50.0) return 1;
    return 0;
}

struct KangLevel {
    int grade = 0;
    std::optional<double> stenosis_ratio_percent;
    std::optional<double> d_hern_mm;
    bool t2_hyper = false;
    bool herniation = false;
};

struct KangAssessment {
    std::array<std::optional<KangLevel>, 5> levels{};
    int patient_grade = 0;
};

inline int patient_grade(const KangAssessment& kang) {
    int g = -1;
    for (const auto& level : kang.levels) {
        if (level) g = std::max(g, level->grade);
    }
    if (g < 0) throw Error(ErrorKind::invalid_argument, "patient grade: no assessed level");
    return g;
}

/// Grades every disc level present in `imap`. `t2_hyper[level]` is the signal
/// module's decision for that level.
inline KangAssessment kang_assessment(const InstanceMap& imap, const HerniationMask& hern, Spacing spacing,
                                      Orientation orientation, const std::array<bool, 5>& t2_hyper) {
    KangAssessment out;
    for (int level = 0; level < instance::disc_count; ++level) {
        if (instance_region(imap, instance::disc(level)).area() == 0) continue;
        KangLevel kl;
        kl.t2_hyper = t2_hyper[level];
        const auto component = herniation_at_level(imap, hern, level);
        kl.herniation = component.has_value();
        if (component) {
            const auto m = stenosis_ratio(imap, *component, level, spacing, orientation);
            kl.stenosis_ratio_percent = m.ratio_percent;
            kl.d_hern_mm = m.d_hern_mm;
        }
        kl.grade = segment_grade(kl.herniation, kl.stenosis_ratio_percent, kl.d_hern_mm, kl.t2_hyper);
        out.levels[level] = kl;
    }
    out.patient_grade = patient_grade(out);
    return out;
}

}  // namespace cervdx
