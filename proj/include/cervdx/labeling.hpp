#pragma once

// Post-processing of a semantic segmentation into numbered instances:
// vertebrae C2..C7 -> 1..6, discs C2/3..C6/7 -> 7..11, cord -> 12, CSF -> 13.

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "cervdx/components.hpp"
#include "cervdx/core.hpp"

namespace cervdx {

struct LabelingParams {
    int min_candidate_area = 20;
    Connectivity connectivity = Connectivity::eight;
    double merge_overlap_fraction = 0.5;
};

struct LabeledInstances {
    InstanceMap map;
    std::vector<std::string> warnings;  // e.g. merged split fragments
};

namespace detail {

inline double y_overlap_fraction(const BoundingBox& a, const BoundingBox& b) {
    const int lo = std::max(a.min_y, b.min_y);
    const int hi = std::min(a.max_y, b.max_y);
    if (hi < lo) return 0.0;
    const int shorter = std::min(a.height(), b.height());
    return static_cast<double>(hi - lo + 1) / static_cast<double>(shorter);
}

// Union-find over candidate fragments whose row extents overlap by more than
// `fraction` of the shorter one.
inline std::vector<Region> merge_split_fragments(std::vector<Region> regions, double fraction,
                                                 bool& merged_any) {
    const std::size_t n = regions.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    merged_any = false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (y_overlap_fraction(regions[i].bbox, regions[j].bbox) > fraction) {
                const std::size_t a = find(i), b = find(j);
                if (a != b) {
                    parent[std::max(a, b)] = std::min(a, b);
                    merged_any = true;
                }
            }
        }
    }
    if (!merged_any) return regions;
    std::vector<std::vector<Pixel>> groups(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& g = groups[find(i)];
        g.insert(g.end(), regions[i].pixels.begin(), regions[i].pixels.end());
    }
    std::vector<Region> out;
    for (auto& g : groups) {
        if (!g.empty()) out.push_back(Region::from_pixels(std::move(g)));
    }
    std::stable_sort(out.begin(), out.end(), centroid_order);
    return out;
}

// Picks `count` consecutive (in centroid-y order) regions with the largest
// total area; ties go to the most superior window.
inline std::vector<Region> select_contiguous(const std::vector<Region>& sorted, int count) {
    std::size_t best_start = 0;
    long best_area = -1;
    for (std::size_t s = 0; s + static_cast<std::size_t>(count) <= sorted.size(); ++s) {
        long total = 0;
        for (int k = 0; k < count; ++k) total += sorted[s + k].area();
        if (total > best_area) {
            best_area = total;
            best_start = s;
        }
    }
    return {sorted.begin() + static_cast<std::ptrdiff_t>(best_start),
            sorted.begin() + static_cast<std::ptrdiff_t>(best_start) + count};
}

inline std::vector<Region> instance_candidates(const SemanticMask& mask, std::uint8_t code,
                                               std::string_view class_name, int required,
                                               const LabelingParams& params,
                                               std::vector<std::string>& warnings) {
    auto regions = connected_components_if(
        mask, [code](std::uint8_t v) { return v == code; }, params.connectivity);
    std::erase_if(regions, [&](const Region& r) { return r.area() < params.min_candidate_area; });
    bool merged = false;
    regions = merge_split_fragments(std::move(regions), params.merge_overlap_fraction, merged);
    if (merged) {
        warnings.push_back("merged split " + std::string(class_name) + " fragments");
    }
    if (static_cast<int>(regions.size()) < required) {
        throw Error(ErrorKind::anatomy, "insufficient anatomy: " + std::string(class_name) +
                                            ", found " + std::to_string(regions.size()));
    }
    auto chosen = select_contiguous(regions, required);
    for (std::size_t i = 1; i < chosen.size(); ++i) {
        if (!(chosen[i - 1].centroid.y < chosen[i].centroid.y)) {
            throw Error(ErrorKind::anatomy, "ambiguous " + std::string(class_name) +
                                                " ordering: equal centroid rows");
        }
    }
    return chosen;
}

}  // namespace detail

inline LabeledInstances label_instances_detailed(const SemanticMask& mask,
                                                 const LabelingParams& params = {}) {
    validate(mask);
    LabeledInstances out;
    const auto vertebrae = detail::instance_candidates(
        mask, static_cast<std::uint8_t>(SemanticCode::vertebra), "V", instance::vertebra_count, params,
        out.warnings);
    const auto discs = detail::instance_candidates(mask, static_cast<std::uint8_t>(SemanticCode::disc),
                                                   "IVD", instance::disc_count, params, out.warnings);

    out.map = InstanceMap(mask.height(), mask.width(), instance::background);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const std::uint8_t c = mask.data()[i];
        if (c == static_cast<std::uint8_t>(SemanticCode::cord)) out.map.data()[i] = instance::cord;
        else if (c == static_cast<std::uint8_t>(SemanticCode::csf)) out.map.data()[i] = instance::csf;
    }
    for (int k = 0; k < instance::vertebra_count; ++k) {
        for (const Pixel& p : vertebrae[k].pixels) out.map(p.y, p.x) = instance::vertebra(k);
    }
    for (int k = 0; k < instance::disc_count; ++k) {
        for (const Pixel& p : discs[k].pixels) out.map(p.y, p.x) = instance::disc(k);
    }
    return out;
}

inline InstanceMap label_instances(const SemanticMask& mask, const LabelingParams& params = {}) {
    return label_instances_detailed(mask, params).map;
}

/// Region of one instance code; empty region when absent.
inline Region instance_region(const InstanceMap& imap, std::uint8_t code) {
    return region_of(imap, code);
}

}  // namespace cervdx
