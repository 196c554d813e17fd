#pragma once

// Independent reference implementations used only by tests. Each one is the
// naive, obviously-correct form of a library computation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <vector>

namespace oracle {

using Cell = std::pair<int, int>;  // (y, x)

/// Partition of the true cells of a row-major grid by breadth-first flood fill.
inline std::set<std::set<Cell>> flood_fill_partition(const std::vector<std::uint8_t>& grid, int h, int w,
                                                     bool eight) {
    std::vector<int> seen(grid.size(), 0);
    std::set<std::set<Cell>> parts;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!grid[y * w + x] || seen[y * w + x]) continue;
            std::set<Cell> part;
            std::queue<Cell> q;
            q.push({y, x});
            seen[y * w + x] = 1;
            while (!q.empty()) {
                auto [cy, cx] = q.front();
                q.pop();
                part.insert({cy, cx});
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dy == 0 && dx == 0) continue;
                        if (!eight && dy != 0 && dx != 0) continue;
                        const int ny = cy + dy, nx = cx + dx;
                        if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
                        if (!grid[ny * w + nx] || seen[ny * w + nx]) continue;
                        seen[ny * w + nx] = 1;
                        q.push({ny, nx});
                    }
                }
            }
            parts.insert(part);
        }
    }
    return parts;
}

/// Direct evaluation of the sum of sqrt(area)-scaled Gaussians at (y, x).
inline double heat_at(const std::vector<std::vector<Cell>>& components, double sigma_scale, int min_size, double y,
                      double x) {
    double total = 0.0;
    for (const auto& comp : components) {
        if (static_cast<int>(comp.size()) < min_size) continue;
        double my = 0.0, mx = 0.0;
        for (auto [cy, cx] : comp) {
            my += cy;
            mx += cx;
        }
        my /= comp.size();
        mx /= comp.size();
        const double a = std::sqrt(static_cast<double>(comp.size()));
        const double s = sigma_scale * a;
        total += a * std::exp(-((x - mx) * (x - mx) + (y - my) * (y - my)) / (2.0 * s * s));
    }
    return total;
}

/// 2D convolution (true flip) of a 0/1 field with a 3x3 kernel, replicated borders.
inline std::vector<double> convolve3(const std::vector<std::uint8_t>& f, int h, int w, const double k[3][3]) {
    std::vector<double> out(f.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = -1; i <= 1; ++i) {
                for (int j = -1; j <= 1; ++j) {
                    const int yy = std::clamp(y - i, 0, h - 1);
                    const int xx = std::clamp(x - j, 0, w - 1);
                    s += k[i + 1][j + 1] * f[yy * w + xx];
                }
            }
            out[y * w + x] = s;
        }
    }
    return out;
}

inline std::vector<double> sobel_magnitude(const std::vector<std::uint8_t>& f, int h, int w) {
    // Convolution kernels (flipped form of the correlation masks).
    const double kx[3][3] = {{1, 0, -1}, {2, 0, -2}, {1, 0, -1}};
    const double ky[3][3] = {{1, 2, 1}, {0, 0, 0}, {-1, -2, -1}};
    const auto gx = convolve3(f, h, w, kx);
    const auto gy = convolve3(f, h, w, ky);
    std::vector<double> m(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) m[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
    return m;
}

/// Probability that a random positive outscores a random negative, ties half.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

/// ICC(2,1) from an explicit n x k ratings table via the two-way ANOVA mean squares.
inline double icc_2_1(const std::vector<std::vector<double>>& table) {
    const std::size_t n = table.size();
    const std::size_t k = table[0].size();
    double grand = 0.0;
    for (const auto& row : table) {
        for (double v : row) grand += v;
    }
    grand /= static_cast<double>(n * k);
    std::vector<double> row_mean(n, 0.0), col_mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            row_mean[i] += table[i][j] / k;
            col_mean[j] += table[i][j] / n;
        }
    }
    double ssr = 0.0, ssc = 0.0, sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) ssr += k * (row_mean[i] - grand) * (row_mean[i] - grand);
    for (std::size_t j = 0; j < k; ++j) ssc += n * (col_mean[j] - grand) * (col_mean[j] - grand);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double r = table[i][j] - row_mean[i] - col_mean[j] + grand;
            sse += r * r;
        }
    }
    const double msr = ssr / (n - 1);
    const double msc = ssc / (k - 1);
    const double mse = sse / ((n - 1) * (k - 1));
    return (msr - mse) / (msr + (k - 1) * mse + k * (msc - mse) / n);
}

/// Confusion counts keyed by (truth, predicted).
inline std::map<std::pair<int, int>, long> confusion(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::map<std::pair<int, int>, long> m;
    for (std::size_t i = 0; i < pred.size(); ++i) ++m[{truth[i], pred[i]}];
    return m;
}

/// Euclidean distance from p to the closed segment a-b, by dense parametric search
/// refined with the closed-form projection.
inline double point_segment_distance(double py, double px, double ay, double ax, double by, double bx) {
    const double dy = by - ay, dx = bx - ax;
    const double len2 = dy * dy + dx * dx;
    double t = len2 > 0 ? ((py - ay) * dy + (px - ax) * dx) / len2 : 0.0;
    t = std::max(0.0, std::min(1.0, t));
    return std::hypot(py - (ay + t * dy), px - (ax + t * dx));
}

/// Smallest area over a fine sweep of orientations of the axis-aligned extent of
/// the rotated point set; an upper bound on (and close to) the true minimum.
inline double min_rect_area_sweep(const std::vector<Cell>& pts, int steps = 18000) {
    double best = INFINITY;
    for (int s = 0; s < steps; ++s) {
        const double th = M_PI / 2.0 * s / steps;
        const double c = std::cos(th), sn = std::sin(th);
        double u0 = INFINITY, u1 = -INFINITY, v0 = INFINITY, v1 = -INFINITY;
        for (auto [y, x] : pts) {
            const double u = c * x + sn * y;
            const double v = -sn * x + c * y;
            u0 = std::min(u0, u);
            u1 = std::max(u1, u);
            v0 = std::min(v0, v);
            v1 = std::max(v1, v);
        }
        best = std::min(best, (u1 - u0) * (v1 - v0));
    }
    return best;
}

}  // namespace oracle
