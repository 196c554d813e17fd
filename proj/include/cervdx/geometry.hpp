#pragma once

// Geometric indicators: cord width profile, MSCC, modified K-line and its
// contact status, and C2-C7 / segmental Cobb angles.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cervdx/components.hpp"
#include "cervdx/core.hpp"
#include "cervdx/herniation.hpp"
#include "cervdx/labeling.hpp"
#include "cervdx/rotated_rect.hpp"

namespace cervdx {

enum class WidthSource { cord, canal };

inline std::string_view to_string(WidthSource s) { return s == WidthSource::cord ? "cord" : "canal"; }

struct WidthSample {
    int y = 0;
    double width_mm = 0.0;
};

/// Horizontal chord width of the cord (or canal) per row, rows ascending.
struct WidthProfile {
    std::vector<WidthSample> samples;

    [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
    [[nodiscard]] int first_row() const { return samples.front().y; }
    [[nodiscard]] int last_row() const { return samples.back().y; }

    /// Width at row y. Rows inside the profile extent but without cord pixels
    /// report 0 (full compression); rows outside the extent are nullopt.
    [[nodiscard]] std::optional<double> at(int y) const {
        if (samples.empty() || y < first_row() || y > last_row()) return std::nullopt;
        auto it = std::lower_bound(samples.begin(), samples.end(), y,
                                   [](const WidthSample& s, int row) { return s.y < row; });
        if (it != samples.end() && it->y == y) return it->width_mm;
        return 0.0;
    }
};

inline WidthProfile cord_width_profile(const InstanceMap& imap, Spacing spacing,
                                       WidthSource source = WidthSource::cord) {
    WidthProfile profile;
    for (int y = 0; y < imap.height(); ++y) {
        int count = 0;
        for (int x = 0; x < imap.width(); ++x) {
            const auto c = imap(y, x);
            if (c == instance::cord || (source == WidthSource::canal && c == instance::csf)) ++count;
        }
        if (count > 0) profile.samples.push_back({y, count * spacing.x_mm});
    }
    if (profile.empty()) throw Error(ErrorKind::anatomy, "spinal cord absent");
    return profile;
}

/// MSCC (%) from the narrowest width and the two reference widths.
inline double mscc_percent(double narrowest, double above, double below) {
    const double reference = 0.5 * (above + below);
    if (reference == 0.0) throw Error(ErrorKind::degenerate, "degenerate reference: mean reference width is 0");
    return (1.0 - narrowest / reference) * 100.0;
}

struct MsccEntry {
    int level = 0;
    double mscc_percent = 0.0;
    double narrowest_mm = 0.0;
    double above_mm = 0.0;
    double below_mm = 0.0;
};

inline std::vector<MsccEntry> mscc(const WidthProfile& profile, const HerniationMask& hern,
                                   const InstanceMap& imap) {
    std::vector<MsccEntry> out;
    for (int level = 0; level < instance::disc_count; ++level) {
        std::set<int> rows;
        for (const auto& comp : hern.components) {
            if (comp.level != level) continue;
            for (int y = comp.region.bbox.min_y; y <= comp.region.bbox.max_y; ++y) rows.insert(y);
        }
        if (rows.empty()) continue;

        const std::string name(kDiscLevelNames[level]);
        double narrowest = std::numeric_limits<double>::infinity();
        for (int y : rows) {
            const auto w = profile.at(y);
            if (!w) throw Error(ErrorKind::anatomy, "herniation rows outside profile at " + name);
            narrowest = std::min(narrowest, *w);
        }
        auto reference_width = [&](int vertebra_index) {
            const Region v = instance_region(imap, instance::vertebra(vertebra_index));
            if (v.area() == 0) {
                throw Error(ErrorKind::anatomy, "MSCC at " + name + ": vertebra " +
                                                    std::string(kVertebraNames[vertebra_index]) + " absent");
            }
            const int row = static_cast<int>(std::lround(v.centroid.y));
            const auto w = profile.at(row);
            if (!w) throw Error(ErrorKind::anatomy, "MSCC at " + name + ": reference row outside profile");
            return *w;
        };
        MsccEntry e;
        e.level = level;
        e.narrowest_mm = narrowest;
        e.above_mm = reference_width(level);
        e.below_mm = reference_width(level + 1);
        e.mscc_percent = mscc_percent(e.narrowest_mm, e.above_mm, e.below_mm);
        out.push_back(e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Modified K-line

enum class KLineStatus { positive, negative };

inline std::string_view to_string(KLineStatus s) { return s == KLineStatus::positive ? "positive" : "negative"; }

struct KLine {
    Point p_c2;
    Point p_c7;
    std::optional<KLineStatus> status;
};

namespace detail {

inline int pixel_index(double coordinate) { return static_cast<int>(std::floor(coordinate + 0.5)); }

struct Chord {
    double t_begin = 0.0;
    double t_end = 0.0;
};

// Longest run of `code` pixels crossed by the infinite line origin + t*dir,
// sampled at `step` pixels. Ties go to the run whose midpoint is nearest t=0.
inline std::optional<Chord> longest_chord(const InstanceMap& imap, Point origin, Point dir, std::uint8_t code,
                                          double step = 0.01) {
    const double reach = std::hypot(imap.height(), imap.width()) + 2.0;
    std::optional<Chord> best;
    std::optional<double> run_begin;
    double last_inside = 0.0;
    const long n = static_cast<long>(std::ceil(2.0 * reach / step));
    auto close_run = [&](double begin, double end) {
        const double len = end - begin;
        if (!best) {
            best = Chord{begin, end};
            return;
        }
        const double best_len = best->t_end - best->t_begin;
        const double mid = std::abs(0.5 * (begin + end));
        const double best_mid = std::abs(0.5 * (best->t_begin + best->t_end));
        if (len > best_len + 1e-12 || (std::abs(len - best_len) <= 1e-12 && mid < best_mid)) {
            best = Chord{begin, end};
        }
    };
    for (long i = 0; i <= n; ++i) {
        const double t = -reach + static_cast<double>(i) * step;
        const Point p = origin + t * dir;
        const int y = pixel_index(p.y);
        const int x = pixel_index(p.x);
        const bool inside = imap.contains(y, x) && imap(y, x) == code;
        if (inside) {
            if (!run_begin) run_begin = t;
            last_inside = t;
        } else if (run_begin) {
            close_run(*run_begin, last_inside);
            run_begin.reset();
        }
    }
    if (run_begin) close_run(*run_begin, last_inside);
    return best;
}

}  // namespace detail

/// Cord midpoint where the given edge line of a vertebra crosses the cord.
inline Point cord_midpoint_on_edge(const InstanceMap& imap, Point edge_point, Point edge_dir,
                                   std::string_view vertebra_name) {
    const auto chord = detail::longest_chord(imap, edge_point, edge_dir, instance::cord);
    if (!chord) {
        throw Error(ErrorKind::anatomy, "K-line: edge line of " + std::string(vertebra_name) +
                                            " never intersects the spinal cord");
    }
    return edge_point + (0.5 * (chord->t_begin + chord->t_end)) * edge_dir;
}

inline KLine modified_k_line(const InstanceMap& imap) {
    const Region c2 = instance_region(imap, instance::vertebra(0));
    const Region c7 = instance_region(imap, instance::vertebra(5));
    if (c2.area() == 0) throw Error(ErrorKind::anatomy, "K-line: C2 absent");
    if (c7.area() == 0) throw Error(ErrorKind::anatomy, "K-line: C7 absent");
    const RotatedRect r2 = min_rotated_rect(c2);
    const RotatedRect r7 = min_rotated_rect(c7);
    KLine line;
    line.p_c2 = cord_midpoint_on_edge(imap, r2.superior_left(), r2.endplate_axis, "C2");
    line.p_c7 = cord_midpoint_on_edge(imap, r7.inferior_left(), r7.endplate_axis, "C7");
    if (!(line.p_c2.y < line.p_c7.y)) {
        throw Error(ErrorKind::degenerate, "K-line: C2 midpoint is not superior to C7 midpoint");
    }
    return line;
}

/// True when the closed segment a-b meets the axis-aligned square centered at c.
inline bool segment_meets_square(Point a, Point b, Point c, double half) {
    // Liang-Barsky clipping of the parametric segment against the square.
    double t0 = 0.0, t1 = 1.0;
    const Point d = b - a;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {a.x - (c.x - half), (c.x + half) - a.x, a.y - (c.y - half), (c.y + half) - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0) t0 = std::max(t0, r);
        else t1 = std::min(t1, r);
        if (t0 > t1) return false;
    }
    return true;
}

/// Supercover rasterization: every pixel whose square the segment touches.
inline std::vector<Pixel> rasterize_segment(Point a, Point b, int height, int width) {
    std::vector<Pixel> out;
    const int y0 = std::max(0, detail::pixel_index(std::min(a.y, b.y)) - 1);
    const int y1 = std::min(height - 1, detail::pixel_index(std::max(a.y, b.y)) + 1);
    const int x0 = std::max(0, detail::pixel_index(std::min(a.x, b.x)) - 1);
    const int x1 = std::min(width - 1, detail::pixel_index(std::max(a.x, b.x)) + 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (segment_meets_square(a, b, {static_cast<double>(y), static_cast<double>(x)}, 0.5)) {
                out.push_back({y, x});
            }
        }
    }
    return out;
}

/// Negative iff a herniation pixel lies on, or 8-adjacent to, the rasterized line.
inline KLineStatus k_line_status(const KLine& line, const HerniationMask& hern) {
    const auto& mask = hern.codes;
    for (const Pixel& p : rasterize_segment(line.p_c2, line.p_c7, mask.height(), mask.width())) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (mask.contains(p.y + dy, p.x + dx) && mask(p.y + dy, p.x + dx)) return KLineStatus::negative;
            }
        }
    }
    return KLineStatus::positive;
}

// ---------------------------------------------------------------------------
// Cobb angles

struct CobbResult {
    double c2_c7_deg = 0.0;
    std::array<std::optional<double>, 5> segmental_deg{};
};

/// Endplate tilt in degrees: positive when the endplate descends toward the anterior side.
inline double endplate_tilt_deg(const RotatedRect& rect, Orientation orientation) {
    const double anterior_sign = -orientation.posterior_sign();
    return std::atan2(anterior_sign * rect.endplate_axis.y, std::abs(rect.endplate_axis.x)) * 180.0 / M_PI;
}

/// Relative angle between two undirected lines, wrapped into (-90, 90].
inline double wrap_line_angle(double deg) {
    while (deg > 90.0) deg -= 180.0;
    while (deg <= -90.0) deg += 180.0;
    return deg;
}

/// Positive = lordosis (C7 endplate descends anteriorly relative to C2), negative = kyphosis.
inline CobbResult cobb_angles(const InstanceMap& imap, Orientation orientation) {
    std::array<std::optional<double>, instance::vertebra_count> tilt{};
    for (int k = 0; k < instance::vertebra_count; ++k) {
        const Region v = instance_region(imap, instance::vertebra(k));
        if (v.area() == 0) continue;
        tilt[k] = endplate_tilt_deg(min_rotated_rect(v), orientation);
    }
    if (!tilt[0]) throw Error(ErrorKind::anatomy, "Cobb: C2 absent");
    if (!tilt[5]) throw Error(ErrorKind::anatomy, "Cobb: C7 absent");
    CobbResult out;
    out.c2_c7_deg = wrap_line_angle(*tilt[5] - *tilt[0]);
    for (int level = 0; level < instance::disc_count; ++level) {
        if (tilt[level] && tilt[level + 1]) {
            out.segmental_deg[level] = wrap_line_angle(*tilt[level + 1] - *tilt[level]);
        }
    }
    return out;
}

}  // namespace cervdx
