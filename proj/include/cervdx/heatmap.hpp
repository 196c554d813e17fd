#pragma once

// Pathology heatmap: one isotropic Gaussian per herniation component with
// peak sqrt(|R|) and standard deviation sigma_scale * sqrt(|R|), summed.

#include <cmath>
#include <vector>

#include "cervdx/components.hpp"
#include "cervdx/core.hpp"
#include "cervdx/herniation.hpp"

namespace cervdx {

struct HeatmapParams {
    double sigma_scale = 1.5;
    int min_region_size = 10;

    void validate() const {
        if (!(sigma_scale > 0.0)) throw Error(ErrorKind::invalid_argument, "sigma_scale must be > 0");
        if (min_region_size < 1) throw Error(ErrorKind::invalid_argument, "min_region_size must be >= 1");
    }
};

struct GaussianBlob {
    Point center;  // real-valued centroid (y, x)
    double sigma = 1.0;
    double peak = 0.0;
};

/// Continuous heat field; evaluating it at pixel centers gives the grid.
class HeatField {
public:
    HeatField() = default;
    explicit HeatField(std::vector<GaussianBlob> blobs) : blobs_(std::move(blobs)) {}

    /// Blobs for every component of `regions` reaching the size floor.
    static HeatField from_regions(const std::vector<Region>& regions, const HeatmapParams& params) {
        params.validate();
        std::vector<GaussianBlob> blobs;
        for (const Region& r : regions) {
            if (r.area() < params.min_region_size) continue;
            const double root = std::sqrt(static_cast<double>(r.area()));
            blobs.push_back({r.centroid, params.sigma_scale * root, root});
        }
        return HeatField(std::move(blobs));
    }

    [[nodiscard]] double operator()(double y, double x) const {
        double h = 0.0;
        for (const auto& b : blobs_) {
            const double dy = y - b.center.y;
            const double dx = x - b.center.x;
            h += std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma)) * b.peak;
        }
        return h;
    }

    [[nodiscard]] const std::vector<GaussianBlob>& blobs() const noexcept { return blobs_; }

    /// Each blob is evaluated in double, rounded to float, and accumulated in
    /// float in blob order, so a union of components rasterizes to exactly the
    /// pixel-wise float sum of the per-component grids.
    [[nodiscard]] HeatGrid rasterize(int height, int width) const {
        HeatGrid grid(height, width, 0.0f);
        for (const auto& b : blobs_) {
            const double inv = 1.0 / (2.0 * b.sigma * b.sigma);
            for (int y = 0; y < height; ++y) {
                const double dy = y - b.center.y;
                for (int x = 0; x < width; ++x) {
                    const double dx = x - b.center.x;
                    grid(y, x) += static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv) * b.peak);
                }
            }
        }
        return grid;
    }

private:
    std::vector<GaussianBlob> blobs_;
};

/// Heatmap over a binary herniation segmentation (components relabeled with 8-connectivity).
inline HeatGrid generate_heatmap(const BinaryGrid& herniation, const HeatmapParams& params = {}) {
    const auto regions = connected_components(herniation, Connectivity::eight);
    return HeatField::from_regions(regions, params).rasterize(herniation.height(), herniation.width());
}

inline HeatGrid generate_heatmap(const HerniationMask& hern, const HeatmapParams& params = {}) {
    return generate_heatmap(hern.codes, params);
}

}  // namespace cervdx
