#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cervdx/components.hpp"
#include "cervdx/core.hpp"

namespace cervdx {

/// Minimum-area enclosing rectangle of a pixel region.
///
/// Corners are ordered 0 = superior/left, 1 = superior/right,
/// 2 = inferior/right, 3 = inferior/left, so edge 0-1 is the superior edge
/// and edge 3-2 the inferior edge. `endplate_axis` is the unit direction of
/// those two edges (x component >= 0); `vertical_axis` points inferior.
struct RotatedRect {
    std::array<Point, 4> corners{};
    Point center;
    Point endplate_axis{0.0, 1.0};
    Point vertical_axis{1.0, 0.0};
    double half_width = 0.0;   // along endplate_axis
    double half_height = 0.0;  // along vertical_axis

    [[nodiscard]] double width() const noexcept { return 2.0 * half_width; }
    [[nodiscard]] double height() const noexcept { return 2.0 * half_height; }
    [[nodiscard]] double area() const noexcept { return width() * height(); }

    /// Angle of the endplate axis in degrees, image frame (positive = right end lower).
    [[nodiscard]] double angle_deg() const noexcept {
        return std::atan2(endplate_axis.y, endplate_axis.x) * 180.0 / M_PI;
    }

    [[nodiscard]] Point superior_left() const noexcept { return corners[0]; }
    [[nodiscard]] Point superior_right() const noexcept { return corners[1]; }
    [[nodiscard]] Point inferior_right() const noexcept { return corners[2]; }
    [[nodiscard]] Point inferior_left() const noexcept { return corners[3]; }
};

namespace detail {

struct IPoint {
    std::int64_t y;
    std::int64_t x;
    friend auto operator<=>(const IPoint&, const IPoint&) = default;
};

inline std::int64_t cross3(const IPoint& o, const IPoint& a, const IPoint& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Andrew's monotone chain; strictly convex hull (collinear points dropped).
inline std::vector<IPoint> convex_hull(std::vector<IPoint> pts) {
    std::sort(pts.begin(), pts.end(), [](const IPoint& a, const IPoint& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<IPoint> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross3(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace detail

inline RotatedRect min_rotated_rect(const std::vector<Pixel>& pixels) {
    if (pixels.size() < 3) {
        throw Error(ErrorKind::degenerate, "rotated rect needs at least 3 pixels, got " +
                                               std::to_string(pixels.size()));
    }
    std::vector<detail::IPoint> pts;
    pts.reserve(pixels.size());
    for (const Pixel& p : pixels) pts.push_back({p.y, p.x});
    const auto hull = detail::convex_hull(std::move(pts));
    if (hull.size() < 3) {
        throw Error(ErrorKind::degenerate, "degenerate region: pixel centers are collinear");
    }

    // Everything is computed relative to hull[0] from integer differences, so
    // the result is exactly translation-equivariant.
    const detail::IPoint origin = hull[0];
    const std::size_t n = hull.size();
    double best_area = std::numeric_limits<double>::infinity();
    Point best_u, best_v;
    double best_umin = 0, best_umax = 0, best_vmin = 0, best_vmax = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % n];
        const double ey = static_cast<double>(b.y - a.y);
        const double ex = static_cast<double>(b.x - a.x);
        const double len = std::hypot(ey, ex);
        const Point u{ey / len, ex / len};
        const Point v{u.x, -u.y};
        double umin = std::numeric_limits<double>::infinity(), umax = -umin;
        double vmin = umin, vmax = -umin;
        for (const auto& q : hull) {
            const Point d{static_cast<double>(q.y - origin.y), static_cast<double>(q.x - origin.x)};
            const double pu = dot(d, u);
            const double pv = dot(d, v);
            umin = std::min(umin, pu);
            umax = std::max(umax, pu);
            vmin = std::min(vmin, pv);
            vmax = std::max(vmax, pv);
        }
        const double area = (umax - umin) * (vmax - vmin);
        if (area < best_area * (1.0 - 1e-12)) {
            best_area = area;
            best_u = u;
            best_v = v;
            best_umin = umin;
            best_umax = umax;
            best_vmin = vmin;
            best_vmax = vmax;
        }
    }

    RotatedRect rect;
    const double cu = 0.5 * (best_umin + best_umax);
    const double cv = 0.5 * (best_vmin + best_vmax);
    rect.center = Point{static_cast<double>(origin.y), static_cast<double>(origin.x)} + cu * best_u + cv * best_v;

    Point h_axis = best_u, t_axis = best_v;
    double hw = 0.5 * (best_umax - best_umin), hh = 0.5 * (best_vmax - best_vmin);
    if (std::abs(best_u.x) < std::abs(best_u.y)) {
        std::swap(h_axis, t_axis);
        std::swap(hw, hh);
    }
    if (h_axis.x < 0.0 || (h_axis.x == 0.0 && h_axis.y > 0.0)) h_axis = -1.0 * h_axis;
    if (t_axis.y < 0.0 || (t_axis.y == 0.0 && t_axis.x < 0.0)) t_axis = -1.0 * t_axis;
    // Zero-valued components may carry a negative sign after the flips above.
    h_axis = {h_axis.y + 0.0, h_axis.x + 0.0};
    t_axis = {t_axis.y + 0.0, t_axis.x + 0.0};

    rect.endplate_axis = h_axis;
    rect.vertical_axis = t_axis;
    rect.half_width = hw;
    rect.half_height = hh;
    rect.corners[0] = rect.center - hw * h_axis - hh * t_axis;
    rect.corners[1] = rect.center + hw * h_axis - hh * t_axis;
    rect.corners[2] = rect.center + hw * h_axis + hh * t_axis;
    rect.corners[3] = rect.center - hw * h_axis + hh * t_axis;
    return rect;
}

inline RotatedRect min_rotated_rect(const Region& region) { return min_rotated_rect(region.pixels); }

}  // namespace cervdx
