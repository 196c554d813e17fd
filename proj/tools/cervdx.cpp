// cervdx command-line tool: diagnose, eval-seg, eval-dx, phantom.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cervdx.hpp"

namespace {

using namespace cervdx;

constexpr int kExitIo = 1;

struct DiagnoseOptions {
    std::vector<std::string> images;
    std::vector<std::string> masks;
    std::string meta;
    std::string case_dir;
    std::string out = ".";
    double sigma_scale = 1.5;
    int min_region_size = 10;
    double t2mi_cut = 23.7;
    double rsci_cut = 1.2;
    std::string width_source = "cord";
    int slices = 1;
};

DiagnoseParams params_from(const DiagnoseOptions& o) {
    DiagnoseParams p;
    p.heatmap.sigma_scale = o.sigma_scale;
    p.heatmap.min_region_size = o.min_region_size;
    p.thresholds.t2mi_cut = o.t2mi_cut;
    p.thresholds.rsci_cut = o.rsci_cut;
    p.width_source = o.width_source == "canal" ? WidthSource::canal : WidthSource::cord;
    p.slices = o.slices;
    return p;
}

int diagnose_one(const std::vector<Case>& slices, const DiagnoseParams& params, const fs::path& out) {
    const Diagnosis d = diagnose_slices(slices, params);
    const Case& middle = slices[slices.size() / 2];
    write_diagnosis(middle, d, out);
    for (const auto& e : d.report.errors) {
        std::cerr << middle.id << ": " << e.module << " [" << e.kind << "]: " << e.message << "\n";
    }
    return exit_code(d.report);
}

int run_diagnose(const DiagnoseOptions& o) {
    const DiagnoseParams params = params_from(o);
    if (!o.case_dir.empty()) {
        const auto ids = list_case_ids(o.case_dir, ".image.png");
        std::vector<int> codes(ids.size(), 0);
        std::vector<std::string> messages(ids.size());
        parallel_for(ids.size(), [&](std::size_t i) {
            try {
                const auto paths = case_paths(o.case_dir, ids[i]);
                codes[i] = diagnose_one({read_case(paths.image, paths.mask, paths.meta)}, params, o.out);
            } catch (const Error& e) {
                codes[i] = kExitIo;
                messages[i] = e.what();
            }
        });
        int worst = 0;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (!messages[i].empty()) std::cerr << ids[i] << ": " << messages[i] << "\n";
            worst = std::max(worst, codes[i]);
        }
        std::cout << "diagnosed " << ids.size() << " cases into " << o.out << "\n";
        return worst;
    }
    if (o.images.size() != static_cast<std::size_t>(o.slices) || o.masks.size() != static_cast<std::size_t>(o.slices)) {
        throw Error(ErrorKind::invalid_argument, "--slices " + std::to_string(o.slices) + " needs that many --image and --mask values");
    }
    if (o.meta.empty()) throw Error(ErrorKind::invalid_argument, "--meta is required");
    std::vector<Case> slices;
    for (int s = 0; s < o.slices; ++s) slices.push_back(read_case(o.images[s], o.masks[s], o.meta));
    for (auto& c : slices) c.id = slices[slices.size() / 2].id;
    return diagnose_one(slices, params, o.out);
}

int run_eval_seg(const std::string& pred, const std::string& gt, const std::string& out) {
    const SegEvaluation e = evaluate_segmentation(pred, gt);
    if (!e.unmatched.empty()) {
        for (const auto& id : e.unmatched) std::cerr << "unmatched case: " << id << "\n";
        return kExitIo;
    }
    fs::create_directories(out);
    write_binary_file(fs::path(out) / "seg_metrics.csv", seg_csv(e));
    write_binary_file(fs::path(out) / "seg_summary.json", seg_summary_json(e).dump(2) + "\n");
    std::cout << "evaluated " << e.case_count << " cases\n";
    return 0;
}

int run_eval_dx(const std::string& reports, const std::string& truths, const std::string& out) {
    const DxEvaluation e = evaluate_diagnosis_dirs(reports, truths);
    if (!e.unmatched.empty()) {
        for (const auto& id : e.unmatched) std::cerr << "unmatched case: " << id << "\n";
        return kExitIo;
    }
    fs::create_directories(out);
    write_binary_file(fs::path(out) / "dx_metrics.csv", dx_csv(e));
    write_binary_file(fs::path(out) / "dx_summary.json", dx_summary_json(e).dump(2) + "\n");
    std::cout << "evaluated " << e.cases.size() << " cases\n";
    return 0;
}

struct PhantomOptions {
    std::string out = ".";
    std::string id = "phantom";
    std::uint64_t seed = 0;
    int count = 1;
    bool random = false;
    double curve = 0.0;
    std::string anterior = "left";
    double noise = 0.0;
    std::vector<std::string> herniations;
    std::vector<std::string> lesions;
};

std::vector<double> split_numbers(const std::string& s, std::size_t expected, const char* what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) v.push_back(std::stod(item));
    if (v.size() != expected) {
        throw Error(ErrorKind::invalid_argument, std::string(what) + " expects " + std::to_string(expected) +
                                                     " colon-separated numbers, got '" + s + "'");
    }
    return v;
}

int run_phantom(const PhantomOptions& o) {
    for (int n = 0; n < o.count; ++n) {
        const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(n);
        std::string id = o.id;
        if (o.count > 1) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "_%03d", n);
            id += buf;
        }
        phantom::PhantomSpec spec;
        if (o.random) {
            spec = phantom::random_spec(seed, id);
        } else {
            spec.id = id;
            spec.seed = seed;
            spec.global_curve_deg = o.curve;
            spec.anterior_side = o.anterior == "right" ? AnteriorSide::right : AnteriorSide::left;
            spec.noise_fraction = o.noise;
            for (const auto& h : o.herniations) {
                const auto v = split_numbers(h, 3, "--hern");
                spec.herniations.push_back({static_cast<int>(v[0]), v[1], v[2], 0.0});
            }
            for (const auto& l : o.lesions) {
                const auto v = split_numbers(l, 3, "--lesion");
                spec.lesions.push_back({static_cast<int>(v[0]), v[1], static_cast<int>(v[2])});
            }
        }
        const phantom::Phantom ph = phantom::generate(spec);
        write_case(ph.case_data, o.out);
        write_binary_file(fs::path(o.out) / (id + ".truth.json"), phantom_truth_json(ph.truth).dump(2) + "\n");
    }
    std::cout << "wrote " << o.count << " phantom case(s) to " << o.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cervical spine MRI diagnostics from segmentation masks"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    DiagnoseOptions d;
    auto* diag = app.add_subcommand("diagnose", "Compute the diagnostic report for one case (or a directory)");
    diag->add_option("--image", d.images, "T2 image (16-bit PNG/PGM); give 3 with --slices 3");
    diag->add_option("--mask", d.masks, "Semantic mask (8-bit PNG/PGM); give 3 with --slices 3");
    diag->add_option("--meta", d.meta, "Meta JSON with spacing_mm and anterior_side");
    diag->add_option("--case-dir", d.case_dir, "Diagnose every <id>.image.png/.mask.png/.meta.json in this directory");
    diag->add_option("--out", d.out, "Output directory")->capture_default_str();
    diag->add_option("--sigma-scale", d.sigma_scale, "Heatmap spread factor")->capture_default_str();
    diag->add_option("--min-region-size", d.min_region_size, "Smallest herniation component for the heatmap (px)")
        ->capture_default_str();
    diag->add_option("--t2mi-cut", d.t2mi_cut, "T2-MI hyperintensity cutoff (percent)")->capture_default_str();
    diag->add_option("--rsci-cut", d.rsci_cut, "RSCI hyperintensity cutoff")->capture_default_str();
    diag->add_option("--width-source", d.width_source, "Width profile source for MSCC")
        ->check(CLI::IsMember({"cord", "canal"}))
        ->capture_default_str();
    diag->add_option("--slices", d.slices, "Number of sagittal slices")->check(CLI::IsMember({1, 3}))->capture_default_str();

    std::string pred_dir, gt_dir, seg_out = ".";
    auto* eval_seg = app.add_subcommand("eval-seg", "Overlap metrics of predicted masks against ground truth");
    eval_seg->add_option("--pred", pred_dir, "Directory of predicted <id>.mask.png")->required();
    eval_seg->add_option("--gt", gt_dir, "Directory of ground-truth <id>.mask.png and <id>.meta.json")->required();
    eval_seg->add_option("--out", seg_out, "Output directory")->capture_default_str();

    std::string report_dir, truth_dir, dx_out = ".";
    auto* eval_dx = app.add_subcommand("eval-dx", "Agreement and classification metrics of reports against truths");
    eval_dx->add_option("--reports", report_dir, "Directory of <id>.report.json")->required();
    eval_dx->add_option("--truth", truth_dir, "Directory of <id>.truth.json (or reference <id>.report.json)")->required();
    eval_dx->add_option("--out", dx_out, "Output directory")->capture_default_str();

    PhantomOptions p;
    auto* ph = app.add_subcommand("phantom", "Write synthetic cases with analytic truth");
    ph->add_option("--out", p.out, "Output directory")->capture_default_str();
    ph->add_option("--id", p.id, "Case id (suffixed _NNN when --count > 1)")->capture_default_str();
    ph->add_option("--seed", p.seed, "Seed of the first case")->capture_default_str();
    ph->add_option("--count", p.count, "Number of cases")->check(CLI::PositiveNumber)->capture_default_str();
    ph->add_flag("--random", p.random, "Draw geometry, herniations and lesions from the seed");
    ph->add_option("--curve", p.curve, "C2-C7 Cobb angle in degrees (lordosis positive)")->capture_default_str();
    ph->add_option("--anterior", p.anterior, "Anterior image side")->check(CLI::IsMember({"left", "right"}))->capture_default_str();
    ph->add_option("--noise", p.noise, "Uniform multiplicative intensity noise fraction")->capture_default_str();
    ph->add_option("--hern", p.herniations, "Herniation level:depth_mm:width_mm (level 0 = C2/3)");
    ph->add_option("--lesion", p.lesions, "Lesion level:amplitude_ratio:extent_rows");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*diag) return run_diagnose(d);
        if (*eval_seg) return run_eval_seg(pred_dir, gt_dir, seg_out);
        if (*eval_dx) return run_eval_dx(report_dir, truth_dir, dx_out);
        if (*ph) return run_phantom(p);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return (e.kind() == ErrorKind::anatomy || e.kind() == ErrorKind::degenerate) ? 2 : kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
