#pragma once

// Batch evaluation over case directories and phantom truth serialization.

#include <algorithm>
#include <array>
#include <atomic>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cervdx/evaluation.hpp"
#include "cervdx/herniation.hpp"
#include "cervdx/io.hpp"
#include "cervdx/labeling.hpp"
#include "cervdx/phantom.hpp"
#include "cervdx/report.hpp"

namespace cervdx {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written to per-index slots; ordering of side effects is unspecified.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = std::thread::hardware_concurrency()) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(n);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

/// Case ids found in `dir` as files named `<id><suffix>`, sorted.
inline std::vector<std::string> list_case_ids(const fs::path& dir, const std::string& suffix) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "not a directory: " + dir.string());
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            ids.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

inline std::string csv_number(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

// ---------------------------------------------------------------------------
// Segmentation evaluation

inline constexpr std::array<const char*, 5> kSegClassNames = {"IVD", "V", "SC", "CSF", "H"};

struct SegRow {
    std::string case_id;
    std::string class_name;
    OverlapMetrics metrics;
    std::string note;
};

struct SegEvaluation {
    std::vector<SegRow> rows;  // sorted by case id, then class order
    std::vector<std::string> unmatched;
    std::map<std::string, std::array<double, 4>> class_means;  // dice, jaccard, precision, recall
    std::size_t case_count = 0;
};

namespace detail {

inline fs::path find_mask(const fs::path& dir, const std::string& id) {
    for (const char* ext : {".mask.png", ".mask.pgm"}) {
        if (fs::exists(dir / (id + ext))) return dir / (id + ext);
    }
    throw Error(ErrorKind::io, "mask for case '" + id + "' not found in " + dir.string());
}

inline std::vector<std::string> mask_ids(const fs::path& dir) {
    auto a = list_case_ids(dir, ".mask.png");
    auto b = list_case_ids(dir, ".mask.pgm");
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

inline SemanticMask load_mask(const fs::path& path) {
    const GrayRaster r = read_gray(path);
    if (r.bit_depth != 8) throw Error(ErrorKind::schema, path.string() + ": mask must be 8-bit");
    SemanticMask m(r.values.height(), r.values.width(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = static_cast<std::uint8_t>(r.values.data()[i]);
    try {
        validate(m);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
    return m;
}

inline BinaryGrid herniation_or_empty(const SemanticMask& m, Orientation o, std::string& note, const char* who) {
    try {
        return extract_herniation(label_instances(m), o).codes;
    } catch (const Error& e) {
        note += std::string(who) + " herniation unavailable: " + e.what() + "; ";
        return BinaryGrid(m.height(), m.width(), 0);
    }
}

}  // namespace detail

/// Compares `<id>.mask.png` files of two directories. Orientation for the
/// herniation class comes from `<id>.meta.json` in `gt_dir`.
inline SegEvaluation evaluate_segmentation(const fs::path& pred_dir, const fs::path& gt_dir) {
    const auto pred_ids = detail::mask_ids(pred_dir);
    const auto gt_ids = detail::mask_ids(gt_dir);
    SegEvaluation out;
    std::vector<std::string> ids;
    std::set_intersection(pred_ids.begin(), pred_ids.end(), gt_ids.begin(), gt_ids.end(), std::back_inserter(ids));
    std::set_symmetric_difference(pred_ids.begin(), pred_ids.end(), gt_ids.begin(), gt_ids.end(),
                                  std::back_inserter(out.unmatched));
    if (!out.unmatched.empty()) return out;

    std::vector<std::vector<SegRow>> per_case(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) {
        const std::string& id = ids[i];
        const SemanticMask pred = detail::load_mask(detail::find_mask(pred_dir, id));
        const SemanticMask gt = detail::load_mask(detail::find_mask(gt_dir, id));
        if (!pred.same_shape(gt)) throw Error(ErrorKind::schema, "case '" + id + "': mask dimensions differ");
        const fs::path meta_path = gt_dir / (id + ".meta.json");
        const Orientation orientation = parse_meta(parse_json_file(meta_path), meta_path.string()).orientation;
        const std::array<std::uint8_t, 4> codes = {2, 1, 3, 4};
        for (int c = 0; c < 4; ++c) {
            per_case[i].push_back({id, kSegClassNames[c], overlap_metrics(pred, gt, codes[c]), ""});
        }
        SegRow h{id, "H", {}, ""};
        const BinaryGrid hp = detail::herniation_or_empty(pred, orientation, h.note, "pred");
        const BinaryGrid hg = detail::herniation_or_empty(gt, orientation, h.note, "gt");
        h.metrics = overlap_metrics(hp, hg, std::uint8_t{1});
        per_case[i].push_back(h);
    });
    out.case_count = ids.size();
    for (auto& rows : per_case) {
        for (auto& r : rows) out.rows.push_back(std::move(r));
    }
    for (const char* name : kSegClassNames) {
        std::array<double, 4> sum{};
        std::size_t n = 0;
        for (const auto& r : out.rows) {
            if (r.class_name != name) continue;
            sum[0] += r.metrics.dice;
            sum[1] += r.metrics.jaccard;
            sum[2] += r.metrics.precision;
            sum[3] += r.metrics.recall;
            ++n;
        }
        if (n > 0) {
            for (double& s : sum) s /= static_cast<double>(n);
        }
        out.class_means[name] = sum;
    }
    return out;
}

inline std::string seg_csv(const SegEvaluation& e) {
    std::string out = "case_id,class,dice,jaccard,precision,recall,both_empty,note\n";
    for (const auto& r : e.rows) {
        out += r.case_id + "," + r.class_name + "," + csv_number(r.metrics.dice) + "," +
               csv_number(r.metrics.jaccard) + "," + csv_number(r.metrics.precision) + "," +
               csv_number(r.metrics.recall) + "," + (r.metrics.both_empty ? "1" : "0") + ",\"" + r.note + "\"\n";
    }
    return out;
}

inline nlohmann::json seg_summary_json(const SegEvaluation& e) {
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [name, m] : e.class_means) {
        classes[name] = {{"dice", m[0]}, {"jaccard", m[1]}, {"precision", m[2]}, {"recall", m[3]}};
    }
    return {{"cases", e.case_count}, {"classes", classes}, {"unmatched", e.unmatched}};
}

// ---------------------------------------------------------------------------
// Diagnosis evaluation

/// The indicator values compared between automatic reports and truths.
struct DxRecord {
    std::optional<double> cobb_deg;
    std::array<std::optional<double>, 5> mscc_percent{};
    std::array<bool, 5> herniation{};
    std::optional<KLineStatus> k_line;
    std::array<std::optional<bool>, 5> hyperintense{};
    std::array<std::optional<int>, 5> kang_grade{};
    std::optional<int> patient_grade;
};

inline DxRecord dx_record(const DiagnosisReport& r) {
    DxRecord d;
    if (r.cobb) d.cobb_deg = r.cobb->c2_c7_deg;
    if (r.mscc) {
        for (const auto& m : *r.mscc) d.mscc_percent[m.level] = m.mscc_percent;
    }
    if (r.herniation) {
        for (int k = 0; k < 5; ++k) d.herniation[k] = r.herniation->levels[k].present;
    }
    if (r.k_line && r.k_line->status) d.k_line = *r.k_line->status;
    if (r.t2) {
        for (int k = 0; k < 5; ++k) {
            if (r.t2->indices.levels[k]) d.hyperintense[k] = r.t2->indices.levels[k]->hyperintense;
        }
    }
    if (r.kang) {
        for (int k = 0; k < 5; ++k) {
            if (r.kang->levels[k]) d.kang_grade[k] = r.kang->levels[k]->grade;
        }
        d.patient_grade = r.kang->patient_grade;
    }
    return d;
}

/// Truth "diagnosis" section in the same shape as the record.
inline nlohmann::json dx_record_json(const DxRecord& d) {
    using nlohmann::json;
    json levels = json::object();
    for (int k = 0; k < 5; ++k) {
        levels[std::string(kDiscLevelNames[k])] = {
            {"herniation", d.herniation[k]},
            {"mscc_percent", d.mscc_percent[k] ? json(round6(*d.mscc_percent[k])) : json(nullptr)},
            {"hyperintense", d.hyperintense[k] ? json(*d.hyperintense[k]) : json(nullptr)},
            {"kang_grade", d.kang_grade[k] ? json(*d.kang_grade[k]) : json(nullptr)}};
    }
    return {{"cobb_c2_c7_deg", d.cobb_deg ? json(round6(*d.cobb_deg)) : json(nullptr)},
            {"k_line_status", d.k_line ? json(std::string(to_string(*d.k_line))) : json(nullptr)},
            {"patient_grade", d.patient_grade ? json(*d.patient_grade) : json(nullptr)},
            {"levels", levels}};
}

inline DxRecord dx_record_from_json(const nlohmann::json& j, const std::string& where) {
    if (j.contains("schema") && j["schema"] == kReportSchema) return dx_record(report_from_json(j));
    if (!j.contains("diagnosis")) throw Error(ErrorKind::schema, where + ": neither a report nor a truth file");
    const auto& d = j["diagnosis"];
    DxRecord r;
    try {
        if (!d.at("cobb_c2_c7_deg").is_null()) r.cobb_deg = d["cobb_c2_c7_deg"].get<double>();
        if (!d.at("k_line_status").is_null()) {
            r.k_line = d["k_line_status"] == "negative" ? KLineStatus::negative : KLineStatus::positive;
        }
        if (!d.at("patient_grade").is_null()) r.patient_grade = d["patient_grade"].get<int>();
        for (int k = 0; k < 5; ++k) {
            const auto& l = d.at("levels").at(std::string(kDiscLevelNames[k]));
            r.herniation[k] = l.at("herniation").get<bool>();
            if (!l.at("mscc_percent").is_null()) r.mscc_percent[k] = l["mscc_percent"].get<double>();
            if (!l.at("hyperintense").is_null()) r.hyperintense[k] = l["hyperintense"].get<bool>();
            if (!l.at("kang_grade").is_null()) r.kang_grade[k] = l["kang_grade"].get<int>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::schema, where + ": truth schema: " + e.what());
    }
    return r;
}

struct DxPair {
    std::string case_id;
    DxRecord automatic;
    DxRecord truth;
};

struct DxEvaluation {
    std::vector<DxPair> cases;  // sorted by case id
    std::vector<std::string> unmatched;
    std::optional<AgreementMetrics> cobb;
    std::optional<AgreementMetrics> mscc;
    std::size_t cobb_pairs = 0;
    std::size_t mscc_pairs = 0;
    std::optional<ClassificationMetrics> herniation;
    std::optional<ClassificationMetrics> k_line;
    std::optional<ClassificationMetrics> hyperintensity;
    std::optional<ClassificationMetrics> kang;
    std::optional<ClassificationMetrics> patient_grade;
};

inline DxEvaluation evaluate_diagnosis(std::vector<DxPair> cases) {
    std::sort(cases.begin(), cases.end(), [](const DxPair& a, const DxPair& b) { return a.case_id < b.case_id; });
    DxEvaluation e;
    std::vector<double> ca, cm, ma, mm;
    std::vector<int> hp, ht, kp, kt, yp, yt, gp, gt, pp, pt;
    for (const auto& c : cases) {
        if (c.automatic.cobb_deg && c.truth.cobb_deg) {
            ca.push_back(*c.automatic.cobb_deg);
            cm.push_back(*c.truth.cobb_deg);
        }
        for (int k = 0; k < 5; ++k) {
            if (c.automatic.mscc_percent[k] && c.truth.mscc_percent[k]) {
                ma.push_back(*c.automatic.mscc_percent[k]);
                mm.push_back(*c.truth.mscc_percent[k]);
            }
            hp.push_back(c.automatic.herniation[k]);
            ht.push_back(c.truth.herniation[k]);
            if (c.automatic.hyperintense[k] && c.truth.hyperintense[k]) {
                yp.push_back(*c.automatic.hyperintense[k]);
                yt.push_back(*c.truth.hyperintense[k]);
            }
            if (c.automatic.kang_grade[k] && c.truth.kang_grade[k]) {
                gp.push_back(*c.automatic.kang_grade[k]);
                gt.push_back(*c.truth.kang_grade[k]);
            }
        }
        if (c.automatic.k_line && c.truth.k_line) {
            kp.push_back(*c.automatic.k_line == KLineStatus::negative);
            kt.push_back(*c.truth.k_line == KLineStatus::negative);
        }
        if (c.automatic.patient_grade && c.truth.patient_grade) {
            pp.push_back(*c.automatic.patient_grade);
            pt.push_back(*c.truth.patient_grade);
        }
    }
    e.cobb_pairs = ca.size();
    e.mscc_pairs = ma.size();
    if (ca.size() >= 3) e.cobb = agreement_metrics(ca, cm);
    if (ma.size() >= 3) e.mscc = agreement_metrics(ma, mm);
    if (!ht.empty()) e.herniation = classification_metrics(hp, ht, {0, 1});
    if (!kt.empty()) e.k_line = classification_metrics(kp, kt, {0, 1});
    if (!yt.empty()) e.hyperintensity = classification_metrics(yp, yt, {0, 1});
    if (!gt.empty()) e.kang = classification_metrics(gp, gt, {0, 1, 2, 3});
    if (!pt.empty()) e.patient_grade = classification_metrics(pp, pt, {0, 1, 2, 3});
    e.cases = std::move(cases);
    return e;
}

inline DxEvaluation evaluate_diagnosis_dirs(const fs::path& report_dir, const fs::path& truth_dir) {
    const auto report_ids = list_case_ids(report_dir, ".report.json");
    auto truth_ids = list_case_ids(truth_dir, ".truth.json");
    const bool truth_are_reports = truth_ids.empty();
    if (truth_are_reports) truth_ids = list_case_ids(truth_dir, ".report.json");
    std::vector<std::string> ids, unmatched;
    std::set_intersection(report_ids.begin(), report_ids.end(), truth_ids.begin(), truth_ids.end(),
                          std::back_inserter(ids));
    std::set_symmetric_difference(report_ids.begin(), report_ids.end(), truth_ids.begin(), truth_ids.end(),
                                  std::back_inserter(unmatched));
    if (!unmatched.empty()) {
        DxEvaluation e;
        e.unmatched = unmatched;
        return e;
    }
    std::vector<DxPair> pairs(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) {
        const fs::path rp = report_dir / (ids[i] + ".report.json");
        const fs::path tp = truth_dir / (ids[i] + (truth_are_reports ? ".report.json" : ".truth.json"));
        pairs[i] = {ids[i], dx_record(read_report(rp)), dx_record_from_json(parse_json_file(tp), tp.string())};
    });
    return evaluate_diagnosis(std::move(pairs));
}

namespace detail {

inline nlohmann::json agreement_json(const std::optional<AgreementMetrics>& m, std::size_t pairs) {
    using nlohmann::json;
    if (!m) return {{"pairs", pairs}, {"note", "fewer than 3 pairs"}};
    return {{"pairs", pairs},
            {"mae", m->mae},
            {"mae_sd", m->mae_sd},
            {"pearson_r", m->pearson_r ? json(*m->pearson_r) : json(nullptr)},
            {"icc_2_1", m->icc ? json(*m->icc) : json(nullptr)}};
}

inline nlohmann::json classification_json(const std::optional<ClassificationMetrics>& m) {
    using nlohmann::json;
    if (!m) return nullptr;
    json per_class = json::array();
    for (const auto& s : m->per_class) {
        per_class.push_back({{"label", s.label},
                             {"precision", s.precision},
                             {"recall", s.recall},
                             {"f1", s.f1},
                             {"support", s.support},
                             {"no_predictions", s.no_predictions},
                             {"no_truth", s.no_truth}});
    }
    return {{"accuracy", m->accuracy},
            {"macro_precision", m->macro_precision},
            {"macro_recall", m->macro_recall},
            {"macro_f1", m->macro_f1},
            {"per_class", per_class},
            {"confusion", {{"labels", m->confusion.labels}, {"counts_true_by_predicted", m->confusion.counts}}}};
}

}  // namespace detail

inline nlohmann::json dx_summary_json(const DxEvaluation& e) {
    return {{"cases", e.cases.size()},
            {"unmatched", e.unmatched},
            {"cobb", detail::agreement_json(e.cobb, e.cobb_pairs)},
            {"mscc", detail::agreement_json(e.mscc, e.mscc_pairs)},
            {"herniation", detail::classification_json(e.herniation)},
            {"k_line", detail::classification_json(e.k_line)},
            {"hyperintensity", detail::classification_json(e.hyperintensity)},
            {"kang", detail::classification_json(e.kang)},
            {"patient_grade", detail::classification_json(e.patient_grade)}};
}

inline std::string dx_csv(const DxEvaluation& e) {
    std::string out = "case_id,metric,automatic,truth\n";
    auto opt = [](const auto& v) { return v ? csv_number(static_cast<double>(*v)) : std::string(); };
    for (const auto& c : e.cases) {
        out += c.case_id + ",cobb_c2_c7_deg," + opt(c.automatic.cobb_deg) + "," + opt(c.truth.cobb_deg) + "\n";
        for (int k = 0; k < 5; ++k) {
            const std::string lv(kDiscLevelNames[k]);
            out += c.case_id + ",mscc_percent:" + lv + "," + opt(c.automatic.mscc_percent[k]) + "," +
                   opt(c.truth.mscc_percent[k]) + "\n";
            out += c.case_id + ",herniation:" + lv + "," + std::to_string(int(c.automatic.herniation[k])) + "," +
                   std::to_string(int(c.truth.herniation[k])) + "\n";
            out += c.case_id + ",hyperintense:" + lv + "," + opt(c.automatic.hyperintense[k]) + "," +
                   opt(c.truth.hyperintense[k]) + "\n";
            out += c.case_id + ",kang_grade:" + lv + "," + opt(c.automatic.kang_grade[k]) + "," +
                   opt(c.truth.kang_grade[k]) + "\n";
        }
        auto kl = [](const std::optional<KLineStatus>& s) {
            return s ? std::string(to_string(*s)) : std::string();
        };
        out += c.case_id + ",k_line_status," + kl(c.automatic.k_line) + "," + kl(c.truth.k_line) + "\n";
        out += c.case_id + ",patient_grade," + opt(c.automatic.patient_grade) + "," + opt(c.truth.patient_grade) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Phantom truth file

inline DxRecord dx_record(const phantom::PhantomTruth& t) {
    DxRecord d;
    d.cobb_deg = t.cobb_c2_c7_deg;
    d.k_line = t.k_line_status;
    d.patient_grade = t.patient_grade;
    for (int k = 0; k < 5; ++k) {
        const auto& l = t.levels[k];
        d.herniation[k] = l.herniation;
        d.mscc_percent[k] = l.mscc_percent;
        d.hyperintense[k] = l.hyperintense;
        d.kang_grade[k] = l.expected_grade;
    }
    return d;
}

inline nlohmann::json phantom_truth_json(const phantom::PhantomTruth& t) {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(round6(*v)) : json(nullptr); };
    auto pt = [](Point p) { return json::array({round6(p.y), round6(p.x)}); };
    json levels = json::object();
    for (int k = 0; k < 5; ++k) {
        const auto& l = t.levels[k];
        levels[std::string(kDiscLevelNames[k])] = {{"herniation_area_px", round6(l.herniation_area_px)},
                                                   {"d_hern_mm", opt(l.d_hern_mm)},
                                                   {"reference_mm", opt(l.reference_mm)},
                                                   {"stenosis_ratio_percent", opt(l.stenosis_ratio_percent)},
                                                   {"t2_mi", round6(l.t2_mi)},
                                                   {"rsci", opt(l.rsci)}};
    }
    json tilts = json::array();
    for (double a : t.endplate_tilt_deg) tilts.push_back(round6(a));
    json seg = json::array();
    for (double a : t.segmental_cobb_deg) seg.push_back(round6(a));
    const auto& s = t.spec;
    json hern = json::array();
    for (const auto& h : s.herniations) {
        hern.push_back({{"level", h.level}, {"depth_mm", h.depth_mm}, {"width_mm", h.width_mm}, {"offset_mm", h.offset_mm}});
    }
    json les = json::array();
    for (const auto& l : s.lesions) {
        les.push_back({{"level", l.level}, {"amplitude_ratio", l.amplitude_ratio}, {"extent_rows", l.extent_rows}});
    }
    return {{"schema", "cervdx-truth/1"},
            {"case_id", s.id},
            {"diagnosis", dx_record_json(dx_record(t))},
            {"geometry",
             {{"endplate_tilt_deg", tilts},
              {"segmental_cobb_deg", seg},
              {"k_line", {{"p_c2", pt(t.k_line_c2)}, {"p_c7", pt(t.k_line_c7)}, {"clearance_px", std::isfinite(t.k_line_clearance_px) ? json(round6(t.k_line_clearance_px)) : json(nullptr)}}},
              {"cord_width",
               {{"base_mm", s.cord_width_mm},
                {"amplitude_mm", s.cord_width_amplitude_mm},
                {"period_mm", s.cord_width_period_mm},
                {"phase_rad", s.cord_width_phase}}},
              {"levels", levels}}},
            {"spec",
             {{"seed", s.seed},
              {"height", s.height},
              {"width", s.width},
              {"spacing_mm", {s.spacing.y_mm, s.spacing.x_mm}},
              {"anterior_side", std::string(to_string(s.anterior_side))},
              {"global_curve_deg", s.global_curve_deg},
              {"noise_fraction", s.noise_fraction},
              {"herniations", hern},
              {"lesions", les}}}};
}

}  // namespace cervdx
