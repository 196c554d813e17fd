#pragma once

// Training objectives evaluated on fixed grids: heatmap L1, cross-entropy +
// soft Dice, Sobel edge L1, and their weighted total.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "cervdx/core.hpp"

namespace cervdx {

inline constexpr int kClassCount = 5;  // bg, V, IVD, SC, CSF

/// Per-class probability maps, indexed by semantic code.
struct ProbMaps {
    std::array<Grid<double>, kClassCount> classes;

    [[nodiscard]] int height() const noexcept { return classes[0].height(); }
    [[nodiscard]] int width() const noexcept { return classes[0].width(); }

    static ProbMaps one_hot(const SemanticMask& mask) {
        ProbMaps p;
        for (auto& c : p.classes) c = Grid<double>(mask.height(), mask.width(), 0.0);
        for (int y = 0; y < mask.height(); ++y) {
            for (int x = 0; x < mask.width(); ++x) p.classes[mask(y, x)](y, x) = 1.0;
        }
        return p;
    }

    static ProbMaps uniform(int height, int width) {
        ProbMaps p;
        for (auto& c : p.classes) c = Grid<double>(height, width, 1.0 / kClassCount);
        return p;
    }

    /// Throws unless every class map has the same shape and each pixel sums to 1 within `tol`.
    void validate(double tol = 1e-5) const {
        for (const auto& c : classes) {
            if (!c.same_shape(classes[0])) throw Error(ErrorKind::invalid_argument, "probability maps differ in shape");
        }
        for (std::size_t i = 0; i < classes[0].size(); ++i) {
            double s = 0.0;
            for (const auto& c : classes) {
                const double v = c.data()[i];
                if (v < 0.0 || v > 1.0) throw Error(ErrorKind::invalid_argument, "probability outside [0, 1]");
                s += v;
            }
            if (std::abs(s - 1.0) > tol) throw Error(ErrorKind::invalid_argument, "probabilities do not sum to 1");
        }
    }

    [[nodiscard]] SemanticMask argmax() const {
        SemanticMask out(height(), width(), 0);
        for (std::size_t i = 0; i < out.size(); ++i) {
            int best = 0;
            for (int c = 1; c < kClassCount; ++c) {
                if (classes[c].data()[i] > classes[best].data()[i]) best = c;
            }
            out.data()[i] = static_cast<std::uint8_t>(best);
        }
        return out;
    }
};

struct LossWeights {
    double lambda_h = 1.0;
    double lambda_e = 1.0;
};

inline constexpr double kProbabilityFloor = 1e-7;
inline constexpr double kDiceSmooth = 1e-5;

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
    if (!a.same_shape(b)) throw Error(ErrorKind::invalid_argument, std::string(what) + ": dimension mismatch");
}

/// Mean absolute difference between two heat grids.
inline double heatmap_loss(const HeatGrid& predicted, const HeatGrid& truth) {
    require_same_shape(predicted, truth, "heatmap loss");
    if (predicted.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        sum += std::abs(static_cast<double>(predicted.data()[i]) - static_cast<double>(truth.data()[i]));
    }
    return sum / static_cast<double>(predicted.size());
}

struct SegLossTerms {
    double cross_entropy = 0.0;
    double dice_loss = 0.0;
    [[nodiscard]] double total() const noexcept { return cross_entropy + dice_loss; }
};

/// Mean pixel NLL plus (1 - mean soft Dice over the four foreground classes).
/// A class absent from both prediction and ground truth scores Dice 1.
inline SegLossTerms seg_loss_terms(const ProbMaps& pred, const SemanticMask& gt) {
    require_same_shape(pred.classes[0], gt, "segmentation loss");
    SegLossTerms t;
    const std::size_t n = gt.size();
    if (n == 0) return t;
    double nll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        nll -= std::log(std::max(pred.classes[gt.data()[i]].data()[i], kProbabilityFloor));
    }
    t.cross_entropy = nll / static_cast<double>(n);

    double dice_sum = 0.0;
    for (int c = 1; c < kClassCount; ++c) {
        double inter = 0.0, psum = 0.0, gsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = pred.classes[c].data()[i];
            const double g = gt.data()[i] == c ? 1.0 : 0.0;
            inter += p * g;
            psum += p;
            gsum += g;
        }
        dice_sum += (psum + gsum == 0.0) ? 1.0 : 2.0 * inter / (psum + gsum + kDiceSmooth);
    }
    t.dice_loss = 1.0 - dice_sum / (kClassCount - 1);
    return t;
}

inline double seg_loss(const ProbMaps& pred, const SemanticMask& gt) { return seg_loss_terms(pred, gt).total(); }

/// 3x3 Sobel gradient magnitude of a 0/1 field with edge replication.
inline Grid<double> sobel_edges(const BinaryGrid& binary) {
    const int h = binary.height();
    const int w = binary.width();
    Grid<double> out(h, w, 0.0);
    auto at = [&](int y, int x) {
        y = std::clamp(y, 0, h - 1);
        x = std::clamp(x, 0, w - 1);
        return binary(y, x) ? 1.0 : 0.0;
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1)) -
                              (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
            const double gy = (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1)) -
                              (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
            out(y, x) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

inline BinaryGrid class_mask(const SemanticMask& mask, std::uint8_t code) {
    BinaryGrid out(mask.height(), mask.width(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) out.data()[i] = mask.data()[i] == code ? 1 : 0;
    return out;
}

/// Average over IVD, V, SC, CSF of the mean |Sobel(pred) - Sobel(gt)|, with
/// the prediction binarized at its argmax.
inline double edge_loss(const ProbMaps& pred, const SemanticMask& gt) {
    require_same_shape(pred.classes[0], gt, "edge loss");
    if (gt.empty()) return 0.0;
    const SemanticMask hard = pred.argmax();
    double total = 0.0;
    for (std::uint8_t c : {std::uint8_t{2}, std::uint8_t{1}, std::uint8_t{3}, std::uint8_t{4}}) {
        const auto ep = sobel_edges(class_mask(hard, c));
        const auto eg = sobel_edges(class_mask(gt, c));
        double sum = 0.0;
        for (std::size_t i = 0; i < ep.size(); ++i) sum += std::abs(ep.data()[i] - eg.data()[i]);
        total += sum / static_cast<double>(ep.size());
    }
    return 0.25 * total;
}

inline double total_loss(const ProbMaps& pred, const SemanticMask& gt, const HeatGrid& h_pred,
                         const HeatGrid& h_true, const LossWeights& w = {}) {
    if (w.lambda_h < 0.0 || w.lambda_e < 0.0) throw Error(ErrorKind::invalid_argument, "loss weights must be >= 0");
    return seg_loss(pred, gt) + w.lambda_h * heatmap_loss(h_pred, h_true) + w.lambda_e * edge_loss(pred, gt);
}

}  // namespace cervdx
