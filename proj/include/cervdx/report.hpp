#pragma once

// Per-case diagnosis report and its canonical JSON form (schema "cervdx/1").
//
// Canonical JSON: object keys sorted, floating values rounded to 6
// significant digits, nulls for indicators that could not be computed.

#include <array>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cervdx/core.hpp"
#include "cervdx/geometry.hpp"
#include "cervdx/heatmap.hpp"
#include "cervdx/io.hpp"
#include "cervdx/kang.hpp"
#include "cervdx/signal.hpp"

namespace cervdx {

inline constexpr const char* kReportSchema = "cervdx/1";
inline constexpr const char* kToolVersion = "0.1.0";

struct DiagnoseParams {
    HeatmapParams heatmap;
    HyperintensityThresholds thresholds;
    WidthSource width_source = WidthSource::cord;
    int slices = 1;
};

struct ReportError {
    std::string module;
    std::string kind;
    std::string message;
    friend bool operator==(const ReportError&, const ReportError&) = default;
};

struct LevelFinding {
    bool present = false;
    int area_px = 0;
    std::optional<Point> centroid;
};

struct HerniationFindings {
    std::array<LevelFinding, 5> levels{};
    int anterior_bulge_count = 0;
};

struct T2Findings {
    T2Curve curve;
    SegmentIndices indices;
};

struct DiagnosisReport {
    std::string case_id;
    std::vector<ReportError> errors;
    std::optional<HerniationFindings> herniation;
    std::optional<std::string> heatmap_file;
    std::optional<std::vector<MsccEntry>> mscc;
    std::optional<KLine> k_line;
    std::optional<CobbResult> cobb;
    std::optional<T2Findings> t2;
    std::optional<KangAssessment> kang;
    std::string tool_version = kToolVersion;
    DiagnoseParams params;
    std::vector<std::string> warnings;

    [[nodiscard]] bool ok() const noexcept { return errors.empty(); }
};

/// Rounds to 6 significant digits (and folds -0 into 0).
inline double round6(double v) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "report: non-finite value");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    const double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;
}

namespace detail {

using json = nlohmann::json;

inline json opt_num(const std::optional<double>& v) { return v ? json(round6(*v)) : json(nullptr); }
inline json point_json(Point p) { return json::array({round6(p.y), round6(p.x)}); }

inline const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorKind::schema, "report schema: missing field '" + where + key + "'");
    }
    return j.at(key);
}

inline double get_num(const json& j, const char* key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_number()) throw Error(ErrorKind::schema, "report schema: field '" + where + key + "' must be a number");
    return v.get<double>();
}

inline std::optional<double> get_opt_num(const json& j, const char* key, const std::string& where) {
    const json& v = require(j, key, where);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) throw Error(ErrorKind::schema, "report schema: field '" + where + key + "' must be a number");
    return v.get<double>();
}

inline bool get_bool(const json& j, const char* key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_boolean()) throw Error(ErrorKind::schema, "report schema: field '" + where + key + "' must be boolean");
    return v.get<bool>();
}

inline std::string get_str(const json& j, const char* key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_string()) throw Error(ErrorKind::schema, "report schema: field '" + where + key + "' must be a string");
    return v.get<std::string>();
}

inline Point get_point(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw Error(ErrorKind::schema, "report schema: '" + where + "' must be [y, x]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

inline int level_from_key(const std::string& name, const std::string& where) {
    const auto level = disc_level_from_name(name);
    if (!level) throw Error(ErrorKind::schema, "report schema: unknown disc level '" + name + "' in " + where);
    return *level;
}

}  // namespace detail

inline nlohmann::json report_to_json(const DiagnosisReport& r) {
    using detail::json;
    using detail::opt_num;
    json j = json::object();
    j["schema"] = kReportSchema;
    j["case_id"] = r.case_id;
    j["status"] = r.ok() ? "ok" : "error";
    j["units"] = {{"angle", "degrees"}, {"distance", "mm"}, {"index", "percent"}, {"area", "pixels"}};

    json errors = json::array();
    for (const auto& e : r.errors) errors.push_back({{"module", e.module}, {"kind", e.kind}, {"message", e.message}});
    j["errors"] = errors;

    if (r.herniation) {
        json levels = json::object();
        for (int k = 0; k < 5; ++k) {
            const auto& f = r.herniation->levels[k];
            levels[std::string(kDiscLevelNames[k])] = {
                {"present", f.present},
                {"area_px", f.area_px},
                {"centroid", f.centroid ? detail::point_json(*f.centroid) : json(nullptr)}};
        }
        j["herniation"] = {{"levels", levels}, {"anterior_bulge_count", r.herniation->anterior_bulge_count}};
    } else {
        j["herniation"] = nullptr;
    }

    j["heatmap"] = r.heatmap_file ? json{{"file", *r.heatmap_file}} : json(nullptr);

    if (r.mscc) {
        json arr = json::array();
        for (const auto& m : *r.mscc) {
            arr.push_back({{"disc_level", std::string(kDiscLevelNames[m.level])},
                           {"mscc_percent", round6(m.mscc_percent)},
                           {"narrowest_mm", round6(m.narrowest_mm)},
                           {"above_mm", round6(m.above_mm)},
                           {"below_mm", round6(m.below_mm)}});
        }
        j["mscc"] = arr;
    } else {
        j["mscc"] = nullptr;
    }

    if (r.k_line) {
        j["k_line"] = {{"p_c2", detail::point_json(r.k_line->p_c2)},
                       {"p_c7", detail::point_json(r.k_line->p_c7)},
                       {"status", r.k_line->status ? json(std::string(to_string(*r.k_line->status))) : json(nullptr)}};
    } else {
        j["k_line"] = nullptr;
    }

    if (r.cobb) {
        json seg = json::object();
        for (int k = 0; k < 5; ++k) seg[std::string(kDiscLevelNames[k])] = opt_num(r.cobb->segmental_deg[k]);
        j["cobb"] = {{"c2_c7_deg", round6(r.cobb->c2_c7_deg)}, {"segmental_deg", seg}};
    } else {
        j["cobb"] = nullptr;
    }

    if (r.t2) {
        json curve = json::array();
        for (const auto& s : r.t2->curve.samples) curve.push_back(json::array({s.y, round6(s.mean_si)}));
        json levels = json::object();
        for (int k = 0; k < 5; ++k) {
            const auto& l = r.t2->indices.levels[k];
            levels[std::string(kDiscLevelNames[k])] =
                l ? json{{"t2_mi", round6(l->t2_mi)}, {"rsci", opt_num(l->rsci)}, {"hyperintense", l->hyperintense}}
                  : json(nullptr);
        }
        j["t2"] = {{"curve", curve}, {"levels", levels}, {"flags", r.t2->indices.flags}};
    } else {
        j["t2"] = nullptr;
    }

    if (r.kang) {
        json levels = json::object();
        for (int k = 0; k < 5; ++k) {
            const auto& l = r.kang->levels[k];
            levels[std::string(kDiscLevelNames[k])] =
                l ? json{{"grade", l->grade},
                         {"herniation", l->herniation},
                         {"stenosis_ratio_percent", opt_num(l->stenosis_ratio_percent)},
                         {"d_hern_mm", opt_num(l->d_hern_mm)},
                         {"t2_hyper", l->t2_hyper}}
                  : json(nullptr);
        }
        j["kang"] = {{"levels", levels}, {"patient_grade", r.kang->patient_grade}};
    } else {
        j["kang"] = nullptr;
    }

    const auto& p = r.params;
    j["provenance"] = {
        {"tool_version", r.tool_version},
        {"parameters",
         {{"sigma_scale", round6(p.heatmap.sigma_scale)},
          {"min_region_size", p.heatmap.min_region_size},
          {"t2mi_cut", round6(p.thresholds.t2mi_cut)},
          {"rsci_cut", round6(p.thresholds.rsci_cut)},
          {"cutoff_rule", p.thresholds.rule == CutoffRule::both ? "both" : "either"},
          {"slices", p.slices}}},
        {"width_source", std::string(to_string(p.width_source))},
        {"warnings", r.warnings}};
    return j;
}

inline DiagnosisReport report_from_json(const nlohmann::json& j) {
    using detail::json;
    DiagnosisReport r;
    if (detail::get_str(j, "schema", "") != kReportSchema) {
        throw Error(ErrorKind::schema, "report schema: unsupported schema '" + j.at("schema").get<std::string>() + "'");
    }
    for (const char* key : {"case_id", "status", "units", "errors", "herniation", "heatmap", "mscc", "k_line", "cobb",
                            "t2", "kang", "provenance"}) {
        detail::require(j, key, "");
    }
    r.case_id = detail::get_str(j, "case_id", "");
    for (const auto& e : j.at("errors")) {
        r.errors.push_back({detail::get_str(e, "module", "errors[]."), detail::get_str(e, "kind", "errors[]."),
                            detail::get_str(e, "message", "errors[].")});
    }

    if (const json& h = j.at("herniation"); !h.is_null()) {
        HerniationFindings f;
        f.anterior_bulge_count = static_cast<int>(detail::get_num(h, "anterior_bulge_count", "herniation."));
        const json& levels = detail::require(h, "levels", "herniation.");
        for (int k = 0; k < 5; ++k) {
            const std::string where = "herniation.levels." + std::string(kDiscLevelNames[k]) + ".";
            const json& l = detail::require(levels, std::string(kDiscLevelNames[k]).c_str(), "herniation.levels.");
            f.levels[k].present = detail::get_bool(l, "present", where);
            f.levels[k].area_px = static_cast<int>(detail::get_num(l, "area_px", where));
            const json& c = detail::require(l, "centroid", where);
            if (!c.is_null()) f.levels[k].centroid = detail::get_point(c, where + "centroid");
        }
        r.herniation = f;
    }

    if (const json& h = j.at("heatmap"); !h.is_null()) r.heatmap_file = detail::get_str(h, "file", "heatmap.");

    if (const json& m = j.at("mscc"); !m.is_null()) {
        if (!m.is_array()) throw Error(ErrorKind::schema, "report schema: 'mscc' must be an array or null");
        std::vector<MsccEntry> entries;
        for (const auto& e : m) {
            MsccEntry me;
            me.level = detail::level_from_key(detail::get_str(e, "disc_level", "mscc[]."), "mscc");
            me.mscc_percent = detail::get_num(e, "mscc_percent", "mscc[].");
            me.narrowest_mm = detail::get_num(e, "narrowest_mm", "mscc[].");
            me.above_mm = detail::get_num(e, "above_mm", "mscc[].");
            me.below_mm = detail::get_num(e, "below_mm", "mscc[].");
            entries.push_back(me);
        }
        r.mscc = entries;
    }

    if (const json& k = j.at("k_line"); !k.is_null()) {
        KLine line;
        line.p_c2 = detail::get_point(detail::require(k, "p_c2", "k_line."), "k_line.p_c2");
        line.p_c7 = detail::get_point(detail::require(k, "p_c7", "k_line."), "k_line.p_c7");
        const json& s = detail::require(k, "status", "k_line.");
        if (!s.is_null()) {
            const std::string v = s.get<std::string>();
            if (v == "positive") line.status = KLineStatus::positive;
            else if (v == "negative") line.status = KLineStatus::negative;
            else throw Error(ErrorKind::schema, "report schema: k_line.status '" + v + "'");
        }
        r.k_line = line;
    }

    if (const json& c = j.at("cobb"); !c.is_null()) {
        CobbResult cr;
        cr.c2_c7_deg = detail::get_num(c, "c2_c7_deg", "cobb.");
        const json& seg = detail::require(c, "segmental_deg", "cobb.");
        for (int k = 0; k < 5; ++k) {
            cr.segmental_deg[k] = detail::get_opt_num(seg, std::string(kDiscLevelNames[k]).c_str(), "cobb.segmental_deg.");
        }
        r.cobb = cr;
    }

    if (const json& t = j.at("t2"); !t.is_null()) {
        T2Findings f;
        for (const auto& s : detail::require(t, "curve", "t2.")) {
            if (!s.is_array() || s.size() != 2) throw Error(ErrorKind::schema, "report schema: t2.curve entries are [y, si]");
            f.curve.samples.push_back({s[0].get<int>(), s[1].get<double>()});
        }
        const json& levels = detail::require(t, "levels", "t2.");
        for (int k = 0; k < 5; ++k) {
            const std::string name(kDiscLevelNames[k]);
            const json& l = detail::require(levels, name.c_str(), "t2.levels.");
            if (l.is_null()) continue;
            const std::string where = "t2.levels." + name + ".";
            f.indices.levels[k] = SegmentIndex{detail::get_num(l, "t2_mi", where), detail::get_opt_num(l, "rsci", where),
                                               detail::get_bool(l, "hyperintense", where)};
        }
        for (const auto& flag : detail::require(t, "flags", "t2.")) f.indices.flags.push_back(flag.get<std::string>());
        r.t2 = f;
    }

    if (const json& k = j.at("kang"); !k.is_null()) {
        KangAssessment ka;
        ka.patient_grade = static_cast<int>(detail::get_num(k, "patient_grade", "kang."));
        const json& levels = detail::require(k, "levels", "kang.");
        for (int i = 0; i < 5; ++i) {
            const std::string name(kDiscLevelNames[i]);
            const json& l = detail::require(levels, name.c_str(), "kang.levels.");
            if (l.is_null()) continue;
            const std::string where = "kang.levels." + name + ".";
            KangLevel kl;
            kl.grade = static_cast<int>(detail::get_num(l, "grade", where));
            kl.herniation = detail::get_bool(l, "herniation", where);
            kl.stenosis_ratio_percent = detail::get_opt_num(l, "stenosis_ratio_percent", where);
            kl.d_hern_mm = detail::get_opt_num(l, "d_hern_mm", where);
            kl.t2_hyper = detail::get_bool(l, "t2_hyper", where);
            ka.levels[i] = kl;
        }
        r.kang = ka;
    }

    const json& prov = j.at("provenance");
    r.tool_version = detail::get_str(prov, "tool_version", "provenance.");
    const json& params = detail::require(prov, "parameters", "provenance.");
    r.params.heatmap.sigma_scale = detail::get_num(params, "sigma_scale", "provenance.parameters.");
    r.params.heatmap.min_region_size = static_cast<int>(detail::get_num(params, "min_region_size", "provenance.parameters."));
    r.params.thresholds.t2mi_cut = detail::get_num(params, "t2mi_cut", "provenance.parameters.");
    r.params.thresholds.rsci_cut = detail::get_num(params, "rsci_cut", "provenance.parameters.");
    r.params.thresholds.rule = detail::get_str(params, "cutoff_rule", "provenance.parameters.") == "either"
                                   ? CutoffRule::either
                                   : CutoffRule::both;
    r.params.slices = static_cast<int>(detail::get_num(params, "slices", "provenance.parameters."));
    r.params.width_source =
        detail::get_str(prov, "width_source", "provenance.") == "canal" ? WidthSource::canal : WidthSource::cord;
    for (const auto& w : detail::require(prov, "warnings", "provenance.")) r.warnings.push_back(w.get<std::string>());
    return r;
}

/// Canonical text: two-space indentation, sorted keys, trailing newline.
inline std::string report_to_string(const DiagnosisReport& r) { return report_to_json(r).dump(2) + "\n"; }

inline void write_report(const DiagnosisReport& r, const fs::path& path) {
    write_binary_file(path, report_to_string(r));
}

inline DiagnosisReport read_report(const fs::path& path) {
    const auto j = parse_json_file(path);
    try {
        return report_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::schema, path.string() + ": report schema: " + e.what());
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

}  // namespace cervdx
