#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "cervdx/core.hpp"

namespace cervdx {

struct BoundingBox {
    int min_y = 0;
    int min_x = 0;
    int max_y = 0;
    int max_x = 0;

    [[nodiscard]] int height() const noexcept { return max_y - min_y + 1; }
    [[nodiscard]] int width() const noexcept { return max_x - min_x + 1; }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// A connected set of pixels with cached area, centroid and bounding box.
struct Region {
    std::vector<Pixel> pixels;  // row-major order
    Point centroid;
    BoundingBox bbox;

    [[nodiscard]] int area() const noexcept { return static_cast<int>(pixels.size()); }

    /// Builds the cached properties from a pixel list (sorted row-major on return).
    static Region from_pixels(std::vector<Pixel> pixels) {
        Region r;
        if (pixels.empty()) return r;
        std::sort(pixels.begin(), pixels.end());
        r.pixels = std::move(pixels);
        double sy = 0.0, sx = 0.0;
        r.bbox = {r.pixels.front().y, r.pixels.front().x, r.pixels.front().y, r.pixels.front().x};
        for (const Pixel& p : r.pixels) {
            sy += p.y;
            sx += p.x;
            r.bbox.min_y = std::min(r.bbox.min_y, p.y);
            r.bbox.max_y = std::max(r.bbox.max_y, p.y);
            r.bbox.min_x = std::min(r.bbox.min_x, p.x);
            r.bbox.max_x = std::max(r.bbox.max_x, p.x);
        }
        const double n = static_cast<double>(r.pixels.size());
        r.centroid = {sy / n, sx / n};
        return r;
    }
};

enum class Connectivity { four = 4, eight = 8 };

namespace detail {

inline bool centroid_order(const Region& a, const Region& b) {
    if (a.centroid.y != b.centroid.y) return a.centroid.y < b.centroid.y;
    return a.centroid.x < b.centroid.x;
}

}  // namespace detail

/// Labels the true pixels of `binary` into maximal connected regions.
/// Output is ordered by ascending centroid y, ties by centroid x.
template <typename T, typename Pred>
std::vector<Region> connected_components_if(const Grid<T>& grid, Pred&& is_member,
                                            Connectivity connectivity = Connectivity::eight) {
    const int h = grid.height();
    const int w = grid.width();
    std::vector<Region> regions;
    if (h == 0 || w == 0) return regions;

    std::vector<std::uint8_t> visited(grid.size(), 0);
    std::vector<Pixel> stack;
    const bool eight = connectivity == Connectivity::eight;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (visited[idx] || !is_member(grid(y, x))) continue;
            visited[idx] = 1;
            std::vector<Pixel> pixels;
            stack.clear();
            stack.push_back({y, x});
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                pixels.push_back(p);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dy == 0 && dx == 0) continue;
                        if (!eight && dy != 0 && dx != 0) continue;
                        const int ny = p.y + dy;
                        const int nx = p.x + dx;
                        if (!grid.contains(ny, nx)) continue;
                        const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                        if (visited[nidx] || !is_member(grid(ny, nx))) continue;
                        visited[nidx] = 1;
                        stack.push_back({ny, nx});
                    }
                }
            }
            regions.push_back(Region::from_pixels(std::move(pixels)));
        }
    }
    std::stable_sort(regions.begin(), regions.end(), detail::centroid_order);
    return regions;
}

inline std::vector<Region> connected_components(const BinaryGrid& binary,
                                                Connectivity connectivity = Connectivity::eight) {
    return connected_components_if(binary, [](std::uint8_t v) { return v != 0; }, connectivity);
}

/// Collects all pixels holding `code` into one (possibly disconnected) region.
template <typename T>
Region region_of(const Grid<T>& grid, T code) {
    std::vector<Pixel> pixels;
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            if (grid(y, x) == code) pixels.push_back({y, x});
        }
    }
    return Region::from_pixels(std::move(pixels));
}

}  // namespace cervdx
