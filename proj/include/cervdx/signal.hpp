#pragma once

// T2 signal analytics over the spinal cord: per-row T2-SI curve, per-level
// T2 myelopathy index (percent), relative signal change index, and the
// hyperintensity decision.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cervdx/components.hpp"
#include "cervdx/core.hpp"
#include "cervdx/labeling.hpp"

namespace cervdx {

struct CurveSample {
    int y = 0;
    double mean_si = 0.0;
};

struct T2Curve {
    std::vector<CurveSample> samples;  // rows ascending
};

inline T2Curve t2_si_curve(const IntensityImage& image, const InstanceMap& imap) {
    if (!image.values.same_shape(imap)) {
        throw Error(ErrorKind::invalid_argument, "T2 curve: image and instance map dimensions differ");
    }
    T2Curve curve;
    for (int y = 0; y < imap.height(); ++y) {
        double sum = 0.0;
        int count = 0;
        for (int x = 0; x < imap.width(); ++x) {
            if (imap(y, x) == instance::cord) {
                sum += image.values(y, x);
                ++count;
            }
        }
        if (count > 0) curve.samples.push_back({y, sum / count});
    }
    if (curve.samples.empty()) throw Error(ErrorKind::anatomy, "spinal cord absent");
    return curve;
}

struct RowSpan {
    int first = 0;
    int last = 0;  // inclusive
    friend bool operator==(const RowSpan&, const RowSpan&) = default;
};

/// Cord rows attributed to each disc level. Adjacent levels are cut at the
/// midpoint between their disc boxes (or at the centroid row of the vertebra
/// between them when one disc is missing); the first level starts at the C2
/// centroid row and the last ends at the C7 centroid row.
inline std::array<std::optional<RowSpan>, 5> segment_spans(const InstanceMap& imap) {
    std::array<std::optional<BoundingBox>, 5> disc_box{};
    bool any_disc = false;
    for (int level = 0; level < instance::disc_count; ++level) {
        const Region d = instance_region(imap, instance::disc(level));
        if (d.area() > 0) {
            disc_box[level] = d.bbox;
            any_disc = true;
        }
    }
    if (!any_disc) throw Error(ErrorKind::anatomy, "segment spans: no disc instances");

    std::array<std::optional<double>, 6> vertebra_row{};
    for (int k = 0; k < instance::vertebra_count; ++k) {
        const Region v = instance_region(imap, instance::vertebra(k));
        if (v.area() > 0) vertebra_row[k] = v.centroid.y;
    }
    auto box_center = [](const BoundingBox& b) { return 0.5 * (b.min_y + b.max_y); };

    // cut[k] = last row of level k; start row of level 0 is `top`.
    const int top = vertebra_row[0] ? static_cast<int>(std::lround(*vertebra_row[0]))
                                    : disc_box[0] ? disc_box[0]->min_y : 0;
    std::array<int, 5> cut{};
    for (int k = 0; k < instance::disc_count; ++k) {
        double boundary;
        if (k == instance::disc_count - 1) {
            boundary = vertebra_row[5] ? *vertebra_row[5] : disc_box[4] ? disc_box[4]->max_y : imap.height() - 1;
            cut[k] = static_cast<int>(std::lround(boundary));
        } else if (disc_box[k] && disc_box[k + 1]) {
            cut[k] = static_cast<int>(std::floor(0.5 * (box_center(*disc_box[k]) + box_center(*disc_box[k + 1]))));
        } else if (vertebra_row[k + 1]) {
            cut[k] = static_cast<int>(std::lround(*vertebra_row[k + 1]));
        } else {
            cut[k] = disc_box[k] ? disc_box[k]->max_y : (k == 0 ? top : cut[k - 1]);
        }
    }
    std::array<std::optional<RowSpan>, 5> spans{};
    int start = top;
    for (int k = 0; k < instance::disc_count; ++k) {
        const int end = std::max(cut[k], start);
        if (disc_box[k]) spans[k] = RowSpan{start, end};
        start = end + 1;
    }
    return spans;
}

/// (max - min) / mean of the curve within `span`, in percent.
inline double t2_mi(const T2Curve& curve, RowSpan span) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    int count = 0;
    for (const auto& s : curve.samples) {
        if (s.y < span.first || s.y > span.last) continue;
        lo = std::min(lo, s.mean_si);
        hi = std::max(hi, s.mean_si);
        sum += s.mean_si;
        ++count;
    }
    if (count < 2) {
        throw Error(ErrorKind::anatomy, "T2-MI: span [" + std::to_string(span.first) + ", " +
                                            std::to_string(span.last) + "] holds fewer than 2 cord rows");
    }
    if (!(sum > 0.0)) throw Error(ErrorKind::degenerate, "T2-MI: zero mean signal");
    // range / (sum / count), arranged so that exactly scaled inputs give identical results
    return (hi - lo) * count / sum * 100.0;
}

/// Ratio form used by tests and the curve: (max - min) / mean over raw values, percent.
inline double t2_mi(const std::vector<double>& values) {
    T2Curve curve;
    for (std::size_t i = 0; i < values.size(); ++i) curve.samples.push_back({static_cast<int>(i), values[i]});
    return t2_mi(curve, {0, static_cast<int>(values.size()) - 1});
}

struct RsciValue {
    std::optional<double> value;
    bool zero_window = false;
};

/// RSCI_i = 3 * m_i / (m_{i-1} + m_i + m_{i+1}) for interior positions only.
/// Returns one entry per input position; boundary positions are always empty,
/// and every position is empty when fewer than three values are given.
inline std::vector<RsciValue> rsci(const std::vector<double>& t2mi) {
    std::vector<RsciValue> out(t2mi.size());
    if (t2mi.size() < 3) return out;
    for (std::size_t i = 1; i + 1 < t2mi.size(); ++i) {
        const double window = t2mi[i - 1] + t2mi[i] + t2mi[i + 1];
        if (window > 0.0) out[i].value = 3.0 * t2mi[i] / window;
        else out[i].zero_window = true;
    }
    return out;
}

enum class CutoffRule { both, either };

struct HyperintensityThresholds {
    double t2mi_cut = 23.7;
    double rsci_cut = 1.2;
    CutoffRule rule = CutoffRule::both;
};

inline bool is_hyperintense(double t2mi, std::optional<double> rsci_value, const HyperintensityThresholds& th) {
    const bool mi = t2mi >= th.t2mi_cut;
    if (!rsci_value) return mi;
    const bool rs = *rsci_value >= th.rsci_cut;
    return th.rule == CutoffRule::both ? (mi && rs) : (mi || rs);
}

struct SegmentIndex {
    double t2_mi = 0.0;
    std::optional<double> rsci;
    bool hyperintense = false;
};

struct SegmentIndices {
    std::array<std::optional<SegmentIndex>, 5> levels{};
    std::vector<std::string> flags;
};

/// Fills `hyperintense` for every computed level.
inline void detect_hyperintensity(SegmentIndices& indices, const HyperintensityThresholds& th = {}) {
    for (auto& level : indices.levels) {
        if (level) level->hyperintense = is_hyperintense(level->t2_mi, level->rsci, th);
    }
}

/// Runs spans -> T2-MI -> RSCI -> cutoffs for one case.
inline SegmentIndices segment_indices(const T2Curve& curve, const InstanceMap& imap,
                                      const HyperintensityThresholds& th = {}) {
    SegmentIndices out;
    const auto spans = segment_spans(imap);
    std::vector<int> present;
    std::vector<double> values;
    for (int level = 0; level < instance::disc_count; ++level) {
        if (!spans[level]) continue;
        try {
            const double mi = t2_mi(curve, *spans[level]);
            out.levels[level] = SegmentIndex{mi, std::nullopt, false};
            present.push_back(level);
            values.push_back(mi);
        } catch (const Error& e) {
            out.flags.push_back(std::string(kDiscLevelNames[level]) + ": " + e.what());
        }
    }
    if (values.size() < 3) out.flags.push_back("RSCI omitted: fewer than 3 levels");
    const auto r = rsci(values);
    for (std::size_t i = 0; i < present.size(); ++i) {
        out.levels[present[i]]->rsci = r[i].value;
        if (r[i].zero_window) {
            out.flags.push_back("RSCI absent at " + std::string(kDiscLevelNames[present[i]]) +
                                ": zero window sum");
        }
    }
    detect_hyperintensity(out, th);
    return out;
}

}  // namespace cervdx
