#pragma once

// Single-case diagnosis: labeling -> herniation -> heatmap -> geometry ->
// signal -> Kang, with per-module error capture, plus overlay rendering.

#include <algorithm>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cervdx/core.hpp"
#include "cervdx/geometry.hpp"
#include "cervdx/heatmap.hpp"
#include "cervdx/herniation.hpp"
#include "cervdx/io.hpp"
#include "cervdx/kang.hpp"
#include "cervdx/labeling.hpp"
#include "cervdx/report.hpp"
#include "cervdx/rotated_rect.hpp"
#include "cervdx/signal.hpp"

namespace cervdx {

/// Everything a diagnosis produced, including intermediates for rendering.
struct Diagnosis {
    DiagnosisReport report;
    std::optional<InstanceMap> instances;
    std::optional<HerniationMask> herniation;
    std::optional<HeatGrid> heatmap;
};

inline std::string heatmap_file_name(const std::string& case_id) { return case_id + ".heatmap.f32"; }
inline std::string report_file_name(const std::string& case_id) { return case_id + ".report.json"; }
inline std::string overlay_file_name(const std::string& case_id) { return case_id + ".overlay.png"; }

namespace detail {

// Runs `fn`, converting a thrown Error into a report error entry.
template <typename Fn>
bool guarded(DiagnosisReport& report, const char* module, Fn&& fn) {
    try {
        fn();
        return true;
    } catch (const Error& e) {
        report.errors.push_back({module, std::string(to_string(e.kind())), e.what()});
        return false;
    }
}

inline HerniationFindings findings_from(const HerniationMask& hern) {
    HerniationFindings f;
    f.anterior_bulge_count = hern.anterior_bulge_count;
    for (int level = 0; level < 5; ++level) {
        std::vector<Pixel> pixels;
        for (const auto& c : hern.components) {
            if (c.level == level) pixels.insert(pixels.end(), c.region.pixels.begin(), c.region.pixels.end());
        }
        if (pixels.empty()) continue;
        const Region merged = Region::from_pixels(std::move(pixels));
        f.levels[level] = {true, merged.area(), merged.centroid};
    }
    return f;
}

}  // namespace detail

inline Diagnosis diagnose(const Case& c, const DiagnoseParams& params = {}) {
    params.heatmap.validate();
    validate(c);
    Diagnosis d;
    DiagnosisReport& r = d.report;
    r.case_id = c.id;
    r.params = params;

    detail::guarded(r, "instance-labeling", [&] {
        auto labeled = label_instances_detailed(c.mask);
        r.warnings.insert(r.warnings.end(), labeled.warnings.begin(), labeled.warnings.end());
        d.instances = std::move(labeled.map);
    });
    if (!d.instances) return d;
    const InstanceMap& imap = *d.instances;

    detail::guarded(r, "herniation", [&] {
        d.herniation = extract_herniation(imap, c.orientation);
        r.herniation = detail::findings_from(*d.herniation);
        for (int level : d.herniation->skipped_levels) {
            r.warnings.push_back("herniation skipped at " + std::string(kDiscLevelNames[level]) +
                                 ": adjacent vertebra missing");
        }
    });

    if (d.herniation) {
        detail::guarded(r, "heatmap", [&] {
            d.heatmap = generate_heatmap(*d.herniation, params.heatmap);
            r.heatmap_file = heatmap_file_name(c.id);
        });
        detail::guarded(r, "geometry", [&] {
            const auto profile = cord_width_profile(imap, c.image.spacing_mm, params.width_source);
            r.mscc = mscc(profile, *d.herniation, imap);
        });
    }
    detail::guarded(r, "geometry", [&] {
        KLine line = modified_k_line(imap);
        if (d.herniation) line.status = k_line_status(line, *d.herniation);
        r.k_line = line;
    });
    detail::guarded(r, "geometry", [&] { r.cobb = cobb_angles(imap, c.orientation); });

    detail::guarded(r, "signal", [&] {
        T2Findings t2;
        t2.curve = t2_si_curve(c.image, imap);
        t2.indices = segment_indices(t2.curve, imap, params.thresholds);
        r.t2 = std::move(t2);
    });

    if (d.herniation) {
        detail::guarded(r, "kang", [&] {
            std::array<bool, 5> hyper{};
            if (r.t2) {
                for (int k = 0; k < 5; ++k) hyper[k] = r.t2->indices.levels[k] && r.t2->indices.levels[k]->hyperintense;
            } else {
                r.warnings.push_back("kang: T2 signal unavailable, hyperintensity treated as absent");
            }
            r.kang = kang_assessment(imap, *d.herniation, c.image.spacing_mm, c.orientation, hyper);
        });
    }
    return d;
}

/// Three-slice diagnosis: herniation presence per level by majority vote over
/// the slices; every other indicator from the middle slice.
inline Diagnosis diagnose_slices(const std::vector<Case>& slices, DiagnoseParams params = {}) {
    if (slices.size() == 1) return diagnose(slices[0], params);
    if (slices.size() != 3) throw Error(ErrorKind::invalid_argument, "slices must be 1 or 3");
    params.slices = 3;
    Diagnosis d = diagnose(slices[1], params);
    std::array<int, 5> votes{};
    for (std::size_t s = 0; s < slices.size(); ++s) {
        try {
            const InstanceMap imap = s == 1 && d.instances ? *d.instances : label_instances(slices[s].mask);
            const auto hern = extract_herniation(imap, slices[s].orientation);
            for (int k = 0; k < 5; ++k) {
                votes[k] += std::any_of(hern.components.begin(), hern.components.end(),
                                        [&](const HerniationComponent& c) { return c.level == k; });
            }
        } catch (const Error& e) {
            d.report.warnings.push_back("slice " + std::to_string(s) + " excluded from herniation vote: " + e.what());
        }
    }
    if (d.report.herniation) {
        for (int k = 0; k < 5; ++k) {
            auto& f = d.report.herniation->levels[k];
            const bool majority = votes[k] >= 2;
            if (majority != f.present) {
                d.report.warnings.push_back("herniation vote at " + std::string(kDiscLevelNames[k]) + " (" +
                                            std::to_string(votes[k]) + "/3) overrides the middle slice");
            }
            f.present = majority;
        }
    }
    return d;
}

/// Exit status for a finished diagnosis: 0 clean, 2 anatomy or degenerate
/// geometry, 1 anything else.
inline int exit_code(const DiagnosisReport& r) {
    int code = 0;
    for (const auto& e : r.errors) {
        if (e.kind == "anatomy" || e.kind == "degenerate") code = std::max(code, 2);
        else code = std::max(code, 1);
    }
    return code == 0 ? 0 : (code == 2 ? 2 : 1);
}

// ---------------------------------------------------------------------------
// Overlay

namespace overlay_color {
inline constexpr std::array<std::uint8_t, 3> vertebra{255, 215, 0};
inline constexpr std::array<std::uint8_t, 3> disc{0, 200, 255};
inline constexpr std::array<std::uint8_t, 3> cord{0, 255, 0};
inline constexpr std::array<std::uint8_t, 3> csf{80, 80, 255};
inline constexpr std::array<std::uint8_t, 3> herniation{255, 0, 0};
inline constexpr std::array<std::uint8_t, 3> cobb_line{255, 128, 0};
inline constexpr std::array<std::uint8_t, 3> k_line{255, 0, 255};
}  // namespace overlay_color

inline RgbImage render_overlay(const Case& c, const Diagnosis& d) {
    const int h = c.image.height();
    const int w = c.image.width();
    RgbImage img(h, w);
    double peak = 0.0;
    for (double v : c.image.values.data()) peak = std::max(peak, v);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto g = static_cast<std::uint8_t>(peak > 0.0 ? std::lround(255.0 * c.image.values(y, x) / peak) : 0);
            img.set(y, x, {g, g, g});
        }
    }
    if (d.instances) {
        const InstanceMap& m = *d.instances;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::uint8_t code = m(y, x);
                if (code == instance::background) continue;
                bool edge = false;
                for (auto [dy, dx] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
                    if (!m.contains(y + dy, x + dx) || m(y + dy, x + dx) != code) edge = true;
                }
                if (!edge) continue;
                if (instance::is_vertebra(code)) img.set(y, x, overlay_color::vertebra);
                else if (instance::is_disc(code)) img.set(y, x, overlay_color::disc);
                else if (code == instance::cord) img.set(y, x, overlay_color::cord);
                else img.set(y, x, overlay_color::csf);
            }
        }
        if (d.herniation) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (d.herniation->codes(y, x)) img.set(y, x, overlay_color::herniation);
                }
            }
        }
        // Cobb construction lines: C2 superior and C7 inferior endplates, extended.
        if (d.report.cobb) {
            auto draw_edge = [&](Point a, Point b) {
                const Point dir = (1.0 / norm(b - a)) * (b - a);
                for (const Pixel& p : rasterize_segment(a - 20.0 * dir, b + 20.0 * dir, h, w)) {
                    img.set(p.y, p.x, overlay_color::cobb_line);
                }
            };
            const RotatedRect c2 = min_rotated_rect(instance_region(m, instance::vertebra(0)));
            const RotatedRect c7 = min_rotated_rect(instance_region(m, instance::vertebra(5)));
            draw_edge(c2.superior_left(), c2.superior_right());
            draw_edge(c7.inferior_left(), c7.inferior_right());
        }
    }
    if (d.report.k_line) {
        for (const Pixel& p : rasterize_segment(d.report.k_line->p_c2, d.report.k_line->p_c7, h, w)) {
            img.set(p.y, p.x, overlay_color::k_line);
        }
    }
    return img;
}

/// Writes `<id>.report.json`, `<id>.heatmap.f32` (when computed) and
/// `<id>.overlay.png` under `out_dir`.
inline void write_diagnosis(const Case& c, const Diagnosis& d, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    write_report(d.report, out_dir / report_file_name(d.report.case_id));
    if (d.heatmap) write_float_grid(*d.heatmap, out_dir / heatmap_file_name(d.report.case_id));
    write_rgb_png(out_dir / overlay_file_name(d.report.case_id), render_overlay(c, d));
}

}  // namespace cervdx
