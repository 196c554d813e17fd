#pragma once

// Segmentation overlap, measurement agreement, classification and ROC metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "cervdx/core.hpp"

namespace cervdx {

struct OverlapMetrics {
    double dice = 1.0;
    double jaccard = 1.0;
    double precision = 1.0;
    double recall = 1.0;
    bool both_empty = false;
    long tp = 0, fp = 0, fn = 0;
};

namespace detail {
inline double ratio_or(double num, double den, double fallback) { return den > 0.0 ? num / den : fallback; }
}  // namespace detail

template <typename T>
OverlapMetrics overlap_metrics(const Grid<T>& pred, const Grid<T>& gt, T class_code) {
    if (!pred.same_shape(gt)) throw Error(ErrorKind::invalid_argument, "overlap metrics: dimension mismatch");
    OverlapMetrics m;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const bool p = pred.data()[i] == class_code;
        const bool g = gt.data()[i] == class_code;
        m.tp += p && g;
        m.fp += p && !g;
        m.fn += !p && g;
    }
    if (m.tp + m.fp + m.fn == 0) {
        m.both_empty = true;
        return m;
    }
    const double tp = static_cast<double>(m.tp), fp = static_cast<double>(m.fp), fn = static_cast<double>(m.fn);
    m.dice = 2.0 * tp / (2.0 * tp + fp + fn);
    m.jaccard = tp / (tp + fp + fn);
    m.precision = detail::ratio_or(tp, tp + fp, 0.0);
    m.recall = detail::ratio_or(tp, tp + fn, 0.0);
    return m;
}

struct AgreementMetrics {
    double mae = 0.0;
    double mae_sd = 0.0;  // sample SD of |auto - manual|
    std::optional<double> pearson_r;
    std::optional<double> icc;  // ICC(2,1): two-way random, absolute agreement, single measure
};

inline AgreementMetrics agreement_metrics(const std::vector<double>& automatic, const std::vector<double>& manual) {
    if (automatic.size() != manual.size()) throw Error(ErrorKind::invalid_argument, "agreement: length mismatch");
    const std::size_t n = automatic.size();
    if (n < 3) throw Error(ErrorKind::invalid_argument, "agreement: need at least 3 pairs");
    const double nd = static_cast<double>(n);

    AgreementMetrics m;
    std::vector<double> abs_err(n);
    for (std::size_t i = 0; i < n; ++i) abs_err[i] = std::abs(automatic[i] - manual[i]);
    m.mae = std::accumulate(abs_err.begin(), abs_err.end(), 0.0) / nd;
    double ss = 0.0;
    for (double e : abs_err) ss += (e - m.mae) * (e - m.mae);
    m.mae_sd = std::sqrt(ss / (nd - 1.0));

    const double ma = std::accumulate(automatic.begin(), automatic.end(), 0.0) / nd;
    const double mm = std::accumulate(manual.begin(), manual.end(), 0.0) / nd;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (automatic[i] - ma) * (manual[i] - mm);
        saa += (automatic[i] - ma) * (automatic[i] - ma);
        sbb += (manual[i] - mm) * (manual[i] - mm);
    }
    if (saa > 0.0 && sbb > 0.0) m.pearson_r = sab / std::sqrt(saa * sbb);

    // Two-way ANOVA with n subjects (rows) and k = 2 raters (columns).
    const double k = 2.0;
    const double grand = 0.5 * (ma + mm);
    double ss_rows = 0.0, ss_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double row_mean = 0.5 * (automatic[i] + manual[i]);
        ss_rows += k * (row_mean - grand) * (row_mean - grand);
        ss_total += (automatic[i] - grand) * (automatic[i] - grand) + (manual[i] - grand) * (manual[i] - grand);
    }
    const double ss_cols = nd * ((ma - grand) * (ma - grand) + (mm - grand) * (mm - grand));
    const double ss_err = ss_total - ss_rows - ss_cols;
    const double ms_rows = ss_rows / (nd - 1.0);
    const double ms_cols = ss_cols / (k - 1.0);
    const double ms_err = ss_err / ((nd - 1.0) * (k - 1.0));
    const double denom = ms_rows + (k - 1.0) * ms_err + k * (ms_cols - ms_err) / nd;
    if (ss_total > 0.0 && denom != 0.0) m.icc = (ms_rows - ms_err) / denom;
    return m;
}

struct ConfusionMatrix {
    std::vector<int> labels;              // class labels, ascending
    std::vector<std::vector<long>> counts;  // [true][predicted]

    [[nodiscard]] long total() const {
        long t = 0;
        for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), 0L);
        return t;
    }
};

struct ClassScores {
    int label = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
    bool no_predictions = false;  // precision undefined, reported as 0
    bool no_truth = false;        // recall undefined, reported as 0
};

struct ClassificationMetrics {
    double accuracy = 0.0;
    std::vector<ClassScores> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    ConfusionMatrix confusion;
};

/// `labels` fixes the class set; when empty it is the union of observed labels.
inline ClassificationMetrics classification_metrics(const std::vector<int>& predicted, const std::vector<int>& truth,
                                                    std::vector<int> labels = {}) {
    if (predicted.size() != truth.size()) throw Error(ErrorKind::invalid_argument, "classification: length mismatch");
    if (labels.empty()) {
        std::set<int> s(truth.begin(), truth.end());
        s.insert(predicted.begin(), predicted.end());
        labels.assign(s.begin(), s.end());
    } else {
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    }
    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;

    ClassificationMetrics m;
    m.confusion.labels = labels;
    m.confusion.counts.assign(labels.size(), std::vector<long>(labels.size(), 0));
    long correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = index.find(truth[i]);
        const auto p = index.find(predicted[i]);
        if (t == index.end() || p == index.end()) {
            throw Error(ErrorKind::invalid_argument, "classification: label outside the class set");
        }
        ++m.confusion.counts[t->second][p->second];
        correct += truth[i] == predicted[i];
    }
    m.accuracy = truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());

    for (std::size_t c = 0; c < labels.size(); ++c) {
        ClassScores s;
        s.label = labels[c];
        const long tp = m.confusion.counts[c][c];
        long predicted_pos = 0, actual_pos = 0;
        for (std::size_t r = 0; r < labels.size(); ++r) {
            predicted_pos += m.confusion.counts[r][c];
            actual_pos += m.confusion.counts[c][r];
        }
        s.support = actual_pos;
        s.no_predictions = predicted_pos == 0;
        s.no_truth = actual_pos == 0;
        s.precision = s.no_predictions ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted_pos);
        s.recall = s.no_truth ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual_pos);
        s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
        m.per_class.push_back(s);
    }
    if (!m.per_class.empty()) {
        const double k = static_cast<double>(m.per_class.size());
        for (const auto& s : m.per_class) {
            m.macro_precision += s.precision / k;
            m.macro_recall += s.recall / k;
            m.macro_f1 += s.f1 / k;
        }
    }
    return m;
}

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct YoudenPoint {
    double threshold = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double youden_index = 0.0;
};

struct RocResult {
    std::vector<double> thresholds;  // distinct scores, descending; points[i+1] uses thresholds[i]
    std::vector<RocPoint> points;    // starts at (0,0), ends at (1,1)
    double auc = 0.0;
    YoudenPoint youden_best;
};

struct ScoredLabel {
    double score = 0.0;
    bool positive = false;
};

/// ROC with "score >= threshold" as the positive call, AUC by trapezoid.
inline RocResult roc(std::vector<ScoredLabel> samples) {
    long pos = 0, neg = 0;
    for (const auto& s : samples) (s.positive ? pos : neg) += 1;
    if (pos == 0 || neg == 0) throw Error(ErrorKind::invalid_argument, "ROC needs both positive and negative samples");
    std::stable_sort(samples.begin(), samples.end(),
                     [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
    RocResult r;
    r.points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    bool have_best = false;
    for (std::size_t i = 0; i < samples.size();) {
        const double t = samples[i].score;
        while (i < samples.size() && samples[i].score == t) {
            (samples[i].positive ? tp : fp) += 1;
            ++i;
        }
        r.thresholds.push_back(t);
        const RocPoint p{static_cast<double>(fp) / neg, static_cast<double>(tp) / pos};
        const RocPoint& prev = r.points.back();
        r.auc += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) * 0.5;
        r.points.push_back(p);
        const double j = p.tpr - p.fpr;
        if (!have_best || j > r.youden_best.youden_index ||
            (j == r.youden_best.youden_index && p.tpr > r.youden_best.sensitivity)) {
            r.youden_best = {t, p.tpr, 1.0 - p.fpr, j};
            have_best = true;
        }
    }
    return r;
}

}  // namespace cervdx
