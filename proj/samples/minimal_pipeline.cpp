// Generates one synthetic case, diagnoses it and prints the main indicators.
// Usage: minimal_pipeline [output_dir]

#include <cstdio>
#include <string>

#include "cervdx.hpp"

int main(int argc, char** argv) {
    using namespace cervdx;

    phantom::PhantomSpec spec;
    spec.id = "sample";
    spec.global_curve_deg = 12.0;
    spec.herniations.push_back({2, 3.0, 6.0});   // C4/5
    spec.lesions.push_back({2, 2.0, 10});        // cord hyperintensity at C4/5
    const phantom::Phantom ph = phantom::generate(spec);

    const Diagnosis d = diagnose(ph.case_data);
    const DiagnosisReport& r = d.report;
    if (!r.ok()) {
        for (const auto& e : r.errors) std::fprintf(stderr, "%s: %s\n", e.module.c_str(), e.message.c_str());
        return exit_code(r);
    }

    std::printf("Cobb C2-C7: %.2f deg (truth %.2f)\n", r.cobb->c2_c7_deg, ph.truth.cobb_c2_c7_deg);
    std::printf("K-line: %s\n", std::string(to_string(*r.k_line->status)).c_str());
    for (const auto& m : *r.mscc) {
        std::printf("MSCC %s: %.1f%%\n", std::string(kDiscLevelNames[m.level]).c_str(), m.mscc_percent);
    }
    for (int k = 0; k < 5; ++k) {
        const auto& t2 = r.t2->indices.levels[k];
        const auto& kang = r.kang->levels[k];
        std::printf("%s  herniation %-3s  T2-MI %6.2f%%  hyperintense %-3s  Kang %d\n",
                    std::string(kDiscLevelNames[k]).c_str(), r.herniation->levels[k].present ? "yes" : "no",
                    t2 ? t2->t2_mi : 0.0, t2 && t2->hyperintense ? "yes" : "no", kang ? kang->grade : 0);
    }
    std::printf("Patient Kang grade: %d\n", r.kang->patient_grade);

    if (argc > 1) {
        write_diagnosis(ph.case_data, d, argv[1]);
        std::printf("wrote report, heatmap and overlay to %s\n", argv[1]);
    }
    return 0;
}
