#pragma once

// Disc herniation from the instance map: disc material lying posterior to the
// line that joins the inferior-posterior corner of the vertebra above with
// the superior-posterior corner of the vertebra below.

#include <optional>
#include <string>
#include <vector>

#include "cervdx/components.hpp"
#include "cervdx/core.hpp"
#include "cervdx/labeling.hpp"
#include "cervdx/rotated_rect.hpp"

namespace cervdx {

struct VertebraCorners {
    Point inferior;
    Point superior;
};

/// Posterior corners of a vertebra's minimum-area rectangle.
inline VertebraCorners posterior_corners(const RotatedRect& rect, Orientation orientation) {
    if (orientation.anterior_side == AnteriorSide::left) {
        return {rect.inferior_right(), rect.superior_right()};
    }
    return {rect.inferior_left(), rect.superior_left()};
}

inline VertebraCorners anterior_corners(const RotatedRect& rect, Orientation orientation) {
    return posterior_corners(rect, orientation.flipped());
}

inline VertebraCorners posterior_corners(const Region& vertebra, Orientation orientation) {
    return posterior_corners(min_rotated_rect(vertebra), orientation);
}

/// Midpoint of the posterior edge of a vertebra rectangle.
inline Point posterior_wall_midpoint(const RotatedRect& rect, Orientation orientation) {
    const auto c = posterior_corners(rect, orientation);
    return 0.5 * (c.inferior + c.superior);
}

struct HerniationComponent {
    Region region;
    int level = 0;  // 0..4 -> C2/3..C6/7
};

struct HerniationMask {
    BinaryGrid codes;
    std::vector<HerniationComponent> components;
    std::vector<int> skipped_levels;  // discs without both adjacent vertebrae
    int anterior_bulge_count = 0;

    [[nodiscard]] bool empty() const noexcept { return components.empty(); }
};

struct HerniationParams {
    int min_component_size = 10;
};

namespace detail {

// Signed offset of p from the directed line a->b, positive on the side the
// unit `toward` vector points to (toward.x carries the side sign).
inline double side_offset(Point a, Point b, Point p, double toward_x_sign) {
    const Point d = b - a;
    Point n{-d.x, d.y};
    if (n.x * toward_x_sign < 0.0) n = -1.0 * n;
    return dot(p - a, n) / norm(n);
}

inline constexpr double kOnLineTolerance = 1e-9;

}  // namespace detail

inline HerniationMask extract_herniation(const InstanceMap& imap, Orientation orientation,
                                         const HerniationParams& params = {}) {
    HerniationMask out;
    out.codes = BinaryGrid(imap.height(), imap.width(), 0);

    std::vector<std::optional<RotatedRect>> rects(instance::vertebra_count);
    for (int k = 0; k < instance::vertebra_count; ++k) {
        const Region v = instance_region(imap, instance::vertebra(k));
        if (v.area() >= 3) {
            try {
                rects[k] = min_rotated_rect(v);
            } catch (const Error&) {
                rects[k].reset();
            }
        }
    }

    for (int level = 0; level < instance::disc_count; ++level) {
        const Region disc = instance_region(imap, instance::disc(level));
        if (disc.area() == 0) continue;
        const auto& upper = rects[level];
        const auto& lower = rects[level + 1];
        if (!upper || !lower) {
            out.skipped_levels.push_back(level);
            continue;
        }
        const Point a = posterior_corners(*upper, orientation).inferior;
        const Point b = posterior_corners(*lower, orientation).superior;
        const Point aa = anterior_corners(*upper, orientation).inferior;
        const Point ab = anterior_corners(*lower, orientation).superior;
        const double post = orientation.posterior_sign();

        BinaryGrid level_mask(imap.height(), imap.width(), 0);
        BinaryGrid bulge_mask(imap.height(), imap.width(), 0);
        for (const Pixel& p : disc.pixels) {
            const Point c{static_cast<double>(p.y), static_cast<double>(p.x)};
            if (detail::side_offset(a, b, c, post) > detail::kOnLineTolerance) level_mask(p.y, p.x) = 1;
            if (detail::side_offset(aa, ab, c, -post) > detail::kOnLineTolerance) bulge_mask(p.y, p.x) = 1;
        }
        for (Region& r : connected_components(level_mask)) {
            if (r.area() < params.min_component_size) continue;
            for (const Pixel& p : r.pixels) out.codes(p.y, p.x) = 1;
            out.components.push_back({std::move(r), level});
        }
        for (const Region& r : connected_components(bulge_mask)) {
            if (r.area() >= params.min_component_size) ++out.anterior_bulge_count;
        }
    }
    return out;
}

/// Herniation pixels belonging to one disc level (intersection of the disc
/// instance with the herniation mask); nullopt when empty.
inline std::optional<Region> herniation_at_level(const InstanceMap& imap, const HerniationMask& hern,
                                                 int level) {
    std::vector<Pixel> pixels;
    const std::uint8_t code = instance::disc(level);
    for (int y = 0; y < imap.height(); ++y) {
        for (int x = 0; x < imap.width(); ++x) {
            if (imap(y, x) == code && hern.codes(y, x)) pixels.push_back({y, x});
        }
    }
    if (pixels.empty()) return std::nullopt;
    return Region::from_pixels(std::move(pixels));
}

}  // namespace cervdx
