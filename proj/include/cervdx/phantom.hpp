#pragma once

// Deterministic synthetic sagittal cervical spine with analytic ground truth.
//
// Geometry is built in a patient frame measured in millimetres:
//   s = distance below the top image edge (inferior positive)
//   a = anterior offset from the canvas column center (anterior positive)
// and mapped to pixels with y = s / spacing_y, x = cx -/+ a / spacing_x
// (cx = (width - 1) / 2), so flipping the anterior side mirrors the raster
// exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cervdx/core.hpp"
#include "cervdx/geometry.hpp"
#include "cervdx/signal.hpp"

namespace cervdx::phantom {

/// splitmix64 finalizer; the phantom noise stream is
/// u(i) = mix(seed * 0x9E3779B97F4A7C15 + i) >> 11, scaled by 2^-53.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t z = splitmix64(seed * 0x9E3779B97F4A7C15ULL + counter);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

struct HerniationDirective {
    int level = 2;            // 0..4 -> C2/3..C6/7
    double depth_mm = 2.0;    // protrusion beyond the posterior wall line
    double width_mm = 5.0;    // extent along the wall line
    double offset_mm = 0.0;   // shift along the wall line (inferior positive)
};

struct LesionDirective {
    int level = 2;
    double amplitude_ratio = 2.0;  // cord intensity multiplier inside the lesion rows
    int extent_rows = 10;
};

struct Intensities {
    double background = 20.0;
    double vertebra = 70.0;
    double disc = 110.0;
    double cord = 100.0;
    double csf = 200.0;
};

struct PhantomSpec {
    std::string id = "phantom";
    std::uint64_t seed = 0;
    int height = 512;
    int width = 512;
    Spacing spacing{0.5, 0.5};
    AnteriorSide anterior_side = AnteriorSide::left;

    double global_curve_deg = 0.0;  // C7 tilt minus C2 tilt; lordosis positive
    std::optional<std::array<double, 6>> vertebra_tilts_deg;  // overrides global_curve_deg

    double vertebra_height_mm = 14.0;
    double vertebra_depth_mm = 16.0;
    double disc_height_mm = 6.0;
    double disc_inset_mm = 1.5;   // discs sit this far anterior of the posterior wall line
    double top_mm = 40.0;         // superior edge of C2 center line
    double column_offset_mm = 10.0;  // anterior offset of the vertebral centers

    double csf_front_mm = 4.0;
    double cord_width_mm = 8.0;
    double cord_width_amplitude_mm = 0.0;
    double cord_width_period_mm = 60.0;
    double cord_width_phase = 0.0;
    double csf_back_mm = 3.0;

    std::vector<HerniationDirective> herniations;
    std::vector<LesionDirective> lesions;
    Intensities intensity;
    double noise_fraction = 0.0;  // uniform multiplicative intensity noise, +/-
};

struct LevelTruth {
    bool herniation = false;
    double herniation_area_px = 0.0;  // analytic half-ellipse area
    std::optional<double> d_hern_mm;
    std::optional<double> reference_mm;
    std::optional<double> stenosis_ratio_percent;
    std::optional<double> mscc_percent;
    double t2_mi = 0.0;
    std::optional<double> rsci;
    bool hyperintense = false;
    int expected_grade = 0;
};

struct PhantomTruth {
    InstanceMap instances;
    BinaryGrid herniation;
    std::array<LevelTruth, 5> levels{};
    std::array<double, 6> endplate_tilt_deg{};
    double cobb_c2_c7_deg = 0.0;
    std::array<double, 5> segmental_cobb_deg{};
    Point k_line_c2;
    Point k_line_c7;
    double k_line_clearance_px = 0.0;  // herniation pixel center to segment; +inf without herniation
    KLineStatus k_line_status = KLineStatus::positive;
    int patient_grade = 0;
    // Corners of each vertebra's true rectangle in pixels, ordered like RotatedRect.
    std::array<std::array<Point, 4>, 6> vertebra_corners{};
    std::array<double, 6> vertebra_center_row{};
    PhantomSpec spec;

    /// Analytic horizontal cord width (mm) at pixel row y.
    [[nodiscard]] double cord_width_mm(double y) const {
        const double s = y * spec.spacing.y_mm;
        return spec.cord_width_mm +
               spec.cord_width_amplitude_mm *
                   std::sin(2.0 * M_PI * s / spec.cord_width_period_mm + spec.cord_width_phase);
    }
};

struct Phantom {
    Case case_data;
    PhantomTruth truth;
};

namespace detail {

struct PF {
    double s = 0.0;
    double a = 0.0;
    friend PF operator+(PF p, PF q) { return {p.s + q.s, p.a + q.a}; }
    friend PF operator-(PF p, PF q) { return {p.s - q.s, p.a - q.a}; }
    friend PF operator*(double k, PF p) { return {k * p.s, k * p.a}; }
};

inline double dotpf(PF p, PF q) { return p.s * q.s + p.a * q.a; }

struct Frame {
    Spacing spacing;
    double cx = 0.0;
    double side = -1.0;  // x = cx + side * a / sx

    [[nodiscard]] Point to_pixel(PF p) const { return {p.s / spacing.y_mm, cx + side * p.a / spacing.x_mm}; }
    [[nodiscard]] PF from_pixel(int y, int x) const {
        return {y * spacing.y_mm, side * (x - cx) * spacing.x_mm};
    }
};

struct VertebraGeom {
    PF center;
    PF e;  // anterior endplate direction
    PF v;  // inferior axis direction
    double tilt_rad = 0.0;
};

// Piecewise-linear posterior wall a_w(s) through the posterior corners,
// extrapolated beyond the ends along the first / last segment.
class Wall {
public:
    explicit Wall(std::vector<PF> pts) : pts_(std::move(pts)) {}

    [[nodiscard]] double at(double s) const {
        std::size_t i = 1;
        while (i + 1 < pts_.size() && s > pts_[i].s) ++i;
        const PF& p = pts_[i - 1];
        const PF& q = pts_[i];
        const double t = (s - p.s) / (q.s - p.s);
        return p.a + t * (q.a - p.a);
    }

private:
    std::vector<PF> pts_;
};

inline bool in_convex_quad(const std::array<PF, 4>& q, PF p) {
    // Counter-orientation agnostic: all cross products share a sign.
    int sign = 0;
    for (int i = 0; i < 4; ++i) {
        const PF a = q[i];
        const PF b = q[(i + 1) % 4];
        const double c = (b.s - a.s) * (p.a - a.a) - (b.a - a.a) * (p.s - a.s);
        if (c == 0.0) continue;
        const int sg = c > 0.0 ? 1 : -1;
        if (sign == 0) sign = sg;
        else if (sg != sign) return false;
    }
    return true;
}

inline double point_segment_distance(Point p, Point a, Point b) {
    const Point d = b - a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + t * d));
}

}  // namespace detail

/// Distance from a point to a segment (pixels); exposed for test oracles.
inline double point_segment_distance(Point p, Point a, Point b) { return detail::point_segment_distance(p, a, b); }

inline Phantom generate(const PhantomSpec& spec) {
    using detail::PF;
    if (spec.height <= 0 || spec.width <= 0) throw Error(ErrorKind::invalid_argument, "phantom: empty canvas");
    if (!(spec.spacing.y_mm > 0.0) || !(spec.spacing.x_mm > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "phantom: spacing must be > 0");
    }
    for (const auto& h : spec.herniations) {
        if (h.level < 0 || h.level > 4 || h.depth_mm < 0.0 || h.width_mm <= 0.0) {
            throw Error(ErrorKind::invalid_argument, "phantom: invalid herniation directive");
        }
    }
    for (const auto& l : spec.lesions) {
        if (l.level < 0 || l.level > 4 || !(l.amplitude_ratio > 0.0) || l.extent_rows < 0) {
            throw Error(ErrorKind::invalid_argument, "phantom: invalid lesion directive");
        }
    }

    const detail::Frame frame{spec.spacing, 0.5 * (spec.width - 1),
                              spec.anterior_side == AnteriorSide::left ? -1.0 : 1.0};
    const double H = spec.vertebra_height_mm;
    const double W = spec.vertebra_depth_mm;
    const double D = spec.disc_height_mm;

    std::array<double, 6> tilts{};
    if (spec.vertebra_tilts_deg) {
        tilts = *spec.vertebra_tilts_deg;
    } else {
        for (int i = 0; i < 6; ++i) tilts[i] = -0.5 * spec.global_curve_deg + spec.global_curve_deg * i / 5.0;
    }

    // Vertebral chain.
    std::array<detail::VertebraGeom, 6> vg{};
    for (int i = 0; i < 6; ++i) {
        const double t = tilts[i] * M_PI / 180.0;
        vg[i].tilt_rad = t;
        vg[i].e = {std::sin(t), std::cos(t)};
        vg[i].v = {std::cos(t), -std::sin(t)};
    }
    vg[0].center = {spec.top_mm + 0.5 * H, spec.column_offset_mm};
    for (int i = 0; i + 1 < 6; ++i) {
        const PF bottom_mid = vg[i].center + (0.5 * H) * vg[i].v;
        PF u = vg[i].v + vg[i + 1].v;
        const double un = std::hypot(u.s, u.a);
        u = (1.0 / un) * u;
        vg[i + 1].center = bottom_mid + D * u + (0.5 * H) * vg[i + 1].v;
    }
    auto corner = [&](int i, double along_e, double along_v) {
        return vg[i].center + (along_e * 0.5 * W) * vg[i].e + (along_v * 0.5 * H) * vg[i].v;
    };
    // Posterior = -e. sup = -v.
    auto sup_post = [&](int i) { return corner(i, -1, -1); };
    auto inf_post = [&](int i) { return corner(i, -1, 1); };
    auto sup_ant = [&](int i) { return corner(i, 1, -1); };
    auto inf_ant = [&](int i) { return corner(i, 1, 1); };

    std::vector<PF> wall_pts;
    for (int i = 0; i < 6; ++i) {
        wall_pts.push_back(sup_post(i));
        wall_pts.push_back(inf_post(i));
    }
    const detail::Wall wall(wall_pts);

    // Overflow check on the vertebral corners and the posterior canal edge.
    for (int i = 0; i < 6; ++i) {
        for (PF c : {sup_post(i), inf_post(i), sup_ant(i), inf_ant(i)}) {
            const Point p = frame.to_pixel(c);
            const double canal = (spec.csf_front_mm + spec.cord_width_mm + std::abs(spec.cord_width_amplitude_mm) +
                                  spec.csf_back_mm) / spec.spacing.x_mm;
            if (p.y < 2.0 || p.y > spec.height - 3.0 || p.x - canal < 2.0 || p.x + canal > spec.width - 3.0) {
                throw Error(ErrorKind::invalid_argument, "geometry overflow: phantom does not fit the canvas");
            }
        }
    }

    auto cord_width_at = [&](double s) {
        return spec.cord_width_mm +
               spec.cord_width_amplitude_mm * std::sin(2.0 * M_PI * s / spec.cord_width_period_mm + spec.cord_width_phase);
    };

    // Disc quads, posterior and anterior edges inset.
    std::array<std::array<PF, 4>, 5> disc_quad{};
    for (int k = 0; k < 5; ++k) {
        const PF e_mid = [&] {
            PF e = vg[k].e + vg[k + 1].e;
            const double n = std::hypot(e.s, e.a);
            return PF{e.s / n, e.a / n};
        }();
        disc_quad[k] = {inf_ant(k) - spec.disc_inset_mm * e_mid, inf_post(k) + spec.disc_inset_mm * e_mid,
                        sup_post(k + 1) + spec.disc_inset_mm * e_mid, sup_ant(k + 1) - spec.disc_inset_mm * e_mid};
    }
    std::array<std::array<PF, 4>, 6> vert_quad{};
    for (int i = 0; i < 6; ++i) vert_quad[i] = {sup_ant(i), sup_post(i), inf_post(i), inf_ant(i)};

    // Herniation bump frames on the true wall line of each disc.
    struct Bump {
        HerniationDirective d;
        PF mid, t, n;  // n points posterior
    };
    std::vector<Bump> bumps;
    for (const auto& h : spec.herniations) {
        const PF p1 = inf_post(h.level);
        const PF p2 = sup_post(h.level + 1);
        PF t = p2 - p1;
        const double tn = std::hypot(t.s, t.a);
        t = (1.0 / tn) * t;
        PF n{-t.a, t.s};
        if (n.a > 0.0) n = -1.0 * n;
        bumps.push_back({h, 0.5 * (p1 + p2) + h.offset_mm * t, t, n});
    }
    auto bump_coords = [](const Bump& b, PF p) {
        const PF d = p - b.mid;
        return std::pair<double, double>{detail::dotpf(d, b.t), detail::dotpf(d, b.n)};
    };
    auto in_bump = [&](const Bump& b, PF p, bool posterior_only) {
        const auto [u, v] = bump_coords(b, p);
        const double hw = 0.5 * b.d.width_mm;
        if (v > 0.0) {
            if (b.d.depth_mm <= 0.0) return false;
            return (u / hw) * (u / hw) + (v / b.d.depth_mm) * (v / b.d.depth_mm) <= 1.0;
        }
        if (posterior_only) return false;
        return std::abs(u) <= hw && v >= -(spec.disc_inset_mm + 0.5 * std::max(spec.spacing.x_mm, spec.spacing.y_mm));
    };

    Phantom out;
    PhantomTruth& truth = out.truth;
    truth.spec = spec;
    Case& cs = out.case_data;
    cs.id = spec.id;
    cs.orientation = {spec.anterior_side};
    cs.image.spacing_mm = spec.spacing;
    cs.image.values = Grid<double>(spec.height, spec.width, spec.intensity.background);
    cs.mask = SemanticMask(spec.height, spec.width, 0);
    truth.instances = InstanceMap(spec.height, spec.width, instance::background);
    truth.herniation = BinaryGrid(spec.height, spec.width, 0);

    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            const PF p = frame.from_pixel(y, x);
            std::uint8_t code = instance::background;
            const double q = wall.at(p.s) - p.a;  // posterior distance from the wall
            const double cw = cord_width_at(p.s);
            if (q > 0.0 && q <= spec.csf_front_mm) code = instance::csf;
            else if (q > spec.csf_front_mm && q <= spec.csf_front_mm + cw) code = instance::cord;
            else if (q > spec.csf_front_mm + cw && q <= spec.csf_front_mm + cw + spec.csf_back_mm) code = instance::csf;
            for (int k = 0; k < 5; ++k) {
                if (detail::in_convex_quad(disc_quad[k], p)) code = instance::disc(k);
            }
            bool vertebra = false;
            for (int i = 0; i < 6; ++i) {
                if (detail::in_convex_quad(vert_quad[i], p)) {
                    code = instance::vertebra(i);
                    vertebra = true;
                }
            }
            if (!vertebra) {
                for (const auto& b : bumps) {
                    if (in_bump(b, p, false)) code = instance::disc(b.d.level);
                    if (in_bump(b, p, true)) truth.herniation(y, x) = 1;
                }
            }
            truth.instances(y, x) = code;
        }
    }
    cs.mask = to_semantic(truth.instances);

    // Cobb truth in the pixel frame.
    for (int i = 0; i < 6; ++i) {
        const Point a = frame.to_pixel(vg[i].center);
        const Point b = frame.to_pixel(vg[i].center + vg[i].e);
        const Point e = b - a;  // anterior-pointing endplate vector
        truth.endplate_tilt_deg[i] = std::atan2(e.y, std::abs(e.x)) * 180.0 / M_PI;
        truth.vertebra_center_row[i] = a.y;
        const auto& c = vert_quad[i];
        // sup_ant, sup_post, inf_post, inf_ant -> superior-left, superior-right, inferior-right, inferior-left
        const bool ant_left = spec.anterior_side == AnteriorSide::left;
        truth.vertebra_corners[i] = ant_left ? std::array<Point, 4>{frame.to_pixel(c[0]), frame.to_pixel(c[1]),
                                                                    frame.to_pixel(c[2]), frame.to_pixel(c[3])}
                                             : std::array<Point, 4>{frame.to_pixel(c[1]), frame.to_pixel(c[0]),
                                                                    frame.to_pixel(c[3]), frame.to_pixel(c[2])};
    }
    truth.cobb_c2_c7_deg = wrap_line_angle(truth.endplate_tilt_deg[5] - truth.endplate_tilt_deg[0]);
    for (int k = 0; k < 5; ++k) {
        truth.segmental_cobb_deg[k] = wrap_line_angle(truth.endplate_tilt_deg[k + 1] - truth.endplate_tilt_deg[k]);
    }

    // K-line truth: midpoint of the cord chord along the C2 superior / C7 inferior edge lines.
    auto chord_mid = [&](PF origin, PF dir) {
        // Walk posterior (negative along e) and bracket the cord interval.
        double t_in = NAN, t_out = NAN;
        const double step = 1e-3;
        bool inside_prev = false;
        for (double t = 0.0; t > -200.0; t -= step) {
            const PF p = origin + t * dir;
            const double q = wall.at(p.s) - p.a;
            const bool inside = q > spec.csf_front_mm && q <= spec.csf_front_mm + cord_width_at(p.s);
            if (inside && !inside_prev) t_in = t;
            if (!inside && inside_prev) {
                t_out = t + step;
                break;
            }
            inside_prev = inside;
        }
        return frame.to_pixel(origin + (0.5 * (t_in + t_out)) * dir);
    };
    truth.k_line_c2 = chord_mid(sup_ant(0), vg[0].e);
    truth.k_line_c7 = chord_mid(inf_ant(5), vg[5].e);

    truth.k_line_clearance_px = std::numeric_limits<double>::infinity();
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            if (!truth.herniation(y, x)) continue;
            truth.k_line_clearance_px =
                std::min(truth.k_line_clearance_px,
                         detail::point_segment_distance({double(y), double(x)}, truth.k_line_c2, truth.k_line_c7));
        }
    }
    // Contact rule: a herniation pixel within Chebyshev distance 1.5 of the segment.
    truth.k_line_status = truth.k_line_clearance_px <= 1.5 ? KLineStatus::negative : KLineStatus::positive;

    // Per-level herniation, stenosis and MSCC truth from the continuous geometry.
    for (const auto& b : bumps) {
        LevelTruth& lt = truth.levels[b.d.level];
        if (b.d.depth_mm <= 0.0) continue;
        lt.herniation = true;
        lt.herniation_area_px += 0.25 * M_PI * b.d.width_mm * b.d.depth_mm / (spec.spacing.x_mm * spec.spacing.y_mm);
        const double cord_gap = spec.csf_front_mm * std::abs(b.n.a);
        const double d = std::max(0.0, cord_gap - b.d.depth_mm);
        lt.d_hern_mm = lt.d_hern_mm ? std::min(*lt.d_hern_mm, d) : d;
    }
    auto wall_normal_a = [&](int i) {
        const PF t = inf_post(i) - sup_post(i);
        return std::abs(t.s) / std::hypot(t.s, t.a);
    };
    for (int k = 0; k < 5; ++k) {
        LevelTruth& lt = truth.levels[k];
        if (!lt.herniation) continue;
        lt.reference_mm = 0.5 * spec.csf_front_mm * (wall_normal_a(k) + wall_normal_a(k + 1));
        lt.stenosis_ratio_percent = (1.0 - *lt.d_hern_mm / *lt.reference_mm) * 100.0;

        // Narrowest cord chord over the herniation rows: sample each row's
        // deepest bump penetration along the horizontal.
        double narrowest = std::numeric_limits<double>::infinity();
        for (const auto& b : bumps) {
            if (b.d.level != k) continue;
            const double hw = 0.5 * b.d.width_mm;
            double smin = std::numeric_limits<double>::infinity(), smax = -smin;
            for (int i = 0; i <= 400; ++i) {
                const double th = M_PI * i / 400.0;
                const PF p = b.mid + (hw * std::cos(th)) * b.t + (b.d.depth_mm * std::sin(th)) * b.n;
                smin = std::min(smin, p.s);
                smax = std::max(smax, p.s);
            }
            for (double s = smin; s <= smax; s += 0.01) {
                double qmax = -std::numeric_limits<double>::infinity();
                for (int i = 0; i <= 400; ++i) {
                    const double th = M_PI * i / 400.0;
                    for (double r = 0.0; r <= 1.0; r += 0.05) {
                        const PF p = b.mid + (r * hw * std::cos(th)) * b.t + (r * b.d.depth_mm * std::sin(th)) * b.n;
                        if (std::abs(p.s - s) < 0.02) qmax = std::max(qmax, wall.at(p.s) - p.a);
                    }
                }
                if (!std::isfinite(qmax)) continue;
                const double intrusion = std::max(0.0, qmax - spec.csf_front_mm);
                narrowest = std::min(narrowest, std::max(0.0, cord_width_at(s) - intrusion));
            }
        }
        const double above = cord_width_at(vg[k].center.s);
        const double below = cord_width_at(vg[k + 1].center.s);
        if (std::isfinite(narrowest)) lt.mscc_percent = (1.0 - narrowest / (0.5 * (above + below))) * 100.0;
    }

    // Intensities, then lesions on cord pixels, then noise.
    std::array<double, 5> disc_center_row{};
    for (int k = 0; k < 5; ++k) {
        const PF c = 0.5 * (inf_post(k) + sup_post(k + 1));
        disc_center_row[k] = c.s / spec.spacing.y_mm;
    }
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            const std::uint8_t c = truth.instances(y, x);
            double v = spec.intensity.background;
            if (instance::is_vertebra(c)) v = spec.intensity.vertebra;
            else if (instance::is_disc(c)) v = spec.intensity.disc;
            else if (c == instance::cord) v = spec.intensity.cord;
            else if (c == instance::csf) v = spec.intensity.csf;
            if (c == instance::cord) {
                for (const auto& l : spec.lesions) {
                    const int first = static_cast<int>(std::lround(disc_center_row[l.level])) - l.extent_rows / 2;
                    if (y >= first && y < first + l.extent_rows) v *= l.amplitude_ratio;
                }
            }
            if (spec.noise_fraction > 0.0) {
                const int xc = spec.anterior_side == AnteriorSide::left ? x : spec.width - 1 - x;
                const std::uint64_t counter = static_cast<std::uint64_t>(y) * spec.width + xc;
                v *= 1.0 + spec.noise_fraction * (2.0 * uniform01(spec.seed, counter) - 1.0);
            }
            cs.image.values(y, x) = std::clamp(std::round(v), 0.0, 65535.0);
        }
    }

    // Signal truth: flat cord plus flat lesions, spans between vertebra centers.
    std::vector<double> mi(5, 0.0);
    for (int k = 0; k < 5; ++k) {
        const double span_rows = truth.vertebra_center_row[k + 1] - truth.vertebra_center_row[k];
        double lo = 1.0, hi = 1.0, rows_weighted = 0.0;
        for (const auto& l : spec.lesions) {
            if (l.level != k || l.extent_rows == 0) continue;
            lo = std::min(lo, l.amplitude_ratio);
            hi = std::max(hi, l.amplitude_ratio);
            rows_weighted += (l.amplitude_ratio - 1.0) * l.extent_rows;
        }
        const double mean = 1.0 + rows_weighted / span_rows;
        mi[k] = (hi - lo) / mean * 100.0;
        truth.levels[k].t2_mi = mi[k];
    }
    const auto r = rsci(mi);
    const HyperintensityThresholds th;
    for (int k = 0; k < 5; ++k) {
        truth.levels[k].rsci = r[k].value;
        truth.levels[k].hyperintense = is_hyperintense(mi[k], r[k].value, th);
    }

    // Grades from the same rule table.
    truth.patient_grade = 0;
    for (int k = 0; k < 5; ++k) {
        LevelTruth& lt = truth.levels[k];
        if (!lt.herniation) lt.expected_grade = 0;
        else if (lt.hyperintense) lt.expected_grade = 3;
        else if (*lt.d_hern_mm == 0.0) lt.expected_grade = 2;
        else if (*lt.stenosis_ratio_percent >= 50.0) lt.expected_grade = 1;
        else lt.expected_grade = 0;
        truth.patient_grade = std::max(truth.patient_grade, lt.expected_grade);
    }
    return out;
}

/// A varied but valid spec drawn from the splitmix stream of `seed`: curve in
/// [-25, 25] deg, herniations at random levels, occasional lesions, 3% noise.
inline PhantomSpec random_spec(std::uint64_t seed, std::string id = "phantom") {
    std::uint64_t counter = 0x5EED0000ULL;
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(seed, counter++); };
    PhantomSpec s;
    s.id = std::move(id);
    s.seed = seed;
    s.global_curve_deg = u(-25.0, 25.0);
    s.anterior_side = u(0.0, 1.0) < 0.5 ? AnteriorSide::left : AnteriorSide::right;
    s.cord_width_amplitude_mm = u(0.0, 1.0);
    s.cord_width_phase = u(0.0, 2.0 * M_PI);
    s.noise_fraction = 0.03;
    for (int level = 0; level < 5; ++level) {
        if (u(0.0, 1.0) < 0.4) s.herniations.push_back({level, u(0.5, 5.0), u(4.0, 8.0), 0.0});
    }
    for (int level = 0; level < 5; ++level) {
        if (u(0.0, 1.0) < 0.2) {
            s.lesions.push_back({level, u(1.5, 2.5), static_cast<int>(u(8.0, 14.0))});
        }
    }
    return s;
}

}  // namespace cervdx::phantom
