#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cervdx.hpp"
#include "fixtures.hpp"

using namespace cervdx;

namespace {

int run(const std::string& args, const fs::path& log = {}) {
    std::string cmd = std::string(CERVDX_CLI_PATH) + " " + args;
    cmd += log.empty() ? " >/dev/null 2>&1" : " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(fixture::slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

// Writes a phantom case and its truth file into `dir`.
phantom::Phantom write_phantom(const phantom::PhantomSpec& spec, const fs::path& dir) {
    const auto ph = phantom::generate(spec);
    write_case(ph.case_data, dir);
    write_binary_file(dir / (spec.id + ".truth.json"), phantom_truth_json(ph.truth).dump(2) + "\n");
    return ph;
}

}  // namespace

TEST(Cli, PhantomThenDiagnose) {
    const auto dir = fixture::scratch_dir("cli_diag");
    ASSERT_EQ(run("phantom --out " + (dir / "in").string() + " --id c1 --curve 12 --hern 2:4:6 --lesion 3:2:10"), 0);
    for (const char* f : {"c1.image.png", "c1.mask.png", "c1.meta.json", "c1.truth.json"}) {
        EXPECT_TRUE(fs::exists(dir / "in" / f)) << f;
    }
    const auto in = dir / "in";
    const std::string common = "diagnose --image " + (in / "c1.image.png").string() + " --mask " +
                               (in / "c1.mask.png").string() + " --meta " + (in / "c1.meta.json").string();
    ASSERT_EQ(run(common + " --out " + (dir / "o1").string()), 0);
    ASSERT_EQ(run(common + " --out " + (dir / "o2").string()), 0);
    for (const char* f : {"c1.report.json", "c1.heatmap.f32", "c1.overlay.png"}) {
        ASSERT_TRUE(fs::exists(dir / "o1" / f)) << f;
        EXPECT_EQ(fixture::slurp(dir / "o1" / f), fixture::slurp(dir / "o2" / f)) << f;
    }
    const auto report = read_report(dir / "o1" / "c1.report.json");
    EXPECT_TRUE(report.herniation->levels[2].present);
    EXPECT_TRUE(report.t2->indices.levels[3]->hyperintense);
}

TEST(Cli, DiagnoseMissingC7ExitsTwo) {
    const auto dir = fixture::scratch_dir("cli_c7");
    auto ph = fixture::plain_phantom();
    ph.case_data.id = "noc7";
    for (std::size_t i = 0; i < ph.case_data.mask.size(); ++i) {
        if (ph.truth.instances.data()[i] == instance::vertebra(5)) ph.case_data.mask.data()[i] = 0;
    }
    const auto p = write_case(ph.case_data, dir);
    EXPECT_EQ(run("diagnose --image " + p.image.string() + " --mask " + p.mask.string() + " --meta " +
                  p.meta.string() + " --out " + (dir / "out").string()),
              2);
    const std::string text = fixture::slurp(dir / "out" / "noc7.report.json");
    EXPECT_NE(text.find("insufficient anatomy"), std::string::npos);
}

TEST(Cli, DiagnoseBadInputsExitOne) {
    const auto dir = fixture::scratch_dir("cli_bad");
    EXPECT_EQ(run("diagnose --image nope.png --mask nope.png --meta nope.json --out " + dir.string()), 1);
    EXPECT_NE(run("diagnose --slices 2"), 0);
    EXPECT_NE(run("frobnicate"), 0);
}

TEST(Cli, DiagnoseThreeSlicesAndCaseDir) {
    const auto dir = fixture::scratch_dir("cli_three");
    for (int s = 0; s < 3; ++s) {
        phantom::PhantomSpec spec;
        spec.id = "s" + std::to_string(s);
        if (s != 1) spec.herniations = {{1, 3.0, 6.0, 0.0}};
        write_case(phantom::generate(spec).case_data, dir / "in");
    }
    const auto in = dir / "in";
    std::string args = "diagnose --slices 3 --meta " + (in / "s1.meta.json").string();
    for (int s = 0; s < 3; ++s) {
        args += " --image " + (in / ("s" + std::to_string(s) + ".image.png")).string() + " --mask " +
                (in / ("s" + std::to_string(s) + ".mask.png")).string();
    }
    ASSERT_EQ(run(args + " --out " + (dir / "o").string()), 0);
    const auto r = read_report(dir / "o" / "s1.report.json");
    EXPECT_TRUE(r.herniation->levels[1].present);
    EXPECT_EQ(r.params.slices, 3);

    ASSERT_EQ(run("diagnose --case-dir " + in.string() + " --out " + (dir / "batch").string()), 0);
    for (int s = 0; s < 3; ++s) EXPECT_TRUE(fs::exists(dir / "batch" / ("s" + std::to_string(s) + ".report.json")));
}

TEST(Cli, EvalSegIdentity) {
    const auto dir = fixture::scratch_dir("cli_seg_id");
    for (int i = 0; i < 3; ++i) {
        auto spec = phantom::random_spec(100 + i, "g" + std::to_string(i));
        write_phantom(spec, dir / "gt");
    }
    ASSERT_EQ(run("eval-seg --pred " + (dir / "gt").string() + " --gt " + (dir / "gt").string() + " --out " +
                  (dir / "o").string()),
              0);
    const auto rows = read_csv(dir / "o" / "seg_metrics.csv");
    ASSERT_EQ(rows.size(), 1u + 3u * 5u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        for (int c = 2; c <= 5; ++c) EXPECT_EQ(std::stod(rows[i][c]), 1.0) << rows[i][0] << " " << rows[i][1];
    }
}

TEST(Cli, EvalSegHalfOverlapAndUnmatched) {
    const auto dir = fixture::scratch_dir("cli_seg_half");
    Case gt;
    gt.id = "h";
    gt.image = {Grid<double>(40, 40, 10.0), {1, 1}};
    gt.mask = SemanticMask(40, 40, 0);
    fixture::fill_rect<std::uint8_t>(gt.mask, 10, 10, 19, 29, 3);
    Case pred = gt;
    fixture::fill_rect<std::uint8_t>(pred.mask, 15, 10, 19, 29, 0);
    write_case(gt, dir / "gt");
    write_case(pred, dir / "pred");
    ASSERT_EQ(run("eval-seg --pred " + (dir / "pred").string() + " --gt " + (dir / "gt").string() + " --out " +
                  (dir / "o").string()),
              0);
    bool found = false;
    for (const auto& row : read_csv(dir / "o" / "seg_metrics.csv")) {
        if (row[1] == "SC") {
            EXPECT_NEAR(std::stod(row[2]), 2.0 / 3.0, 1e-12);
            found = true;
        }
    }
    EXPECT_TRUE(found);
    Case extra = gt;
    extra.id = "only_gt";
    write_case(extra, dir / "gt");
    EXPECT_EQ(run("eval-seg --pred " + (dir / "pred").string() + " --gt " + (dir / "gt").string() + " --out " +
                  (dir / "o2").string()),
              1);
}

TEST(BatchEval, SummaryMeansEqualRowMeans) {
    const auto dir = fixture::scratch_dir("batch_seg");
    for (int i = 0; i < 50; ++i) {
        const auto spec = phantom::random_spec(200 + i, "c" + std::to_string(i));
        const auto ph = phantom::generate(spec);
        write_case(ph.case_data, dir / "gt");
        Case pred = ph.case_data;
        // Perturb: shift every label one column right in a band of rows.
        for (int y = 100 + i; y < 220 + i; ++y) {
            for (int x = pred.mask.width() - 1; x > 0; --x) pred.mask(y, x) = ph.case_data.mask(y, x - 1);
        }
        write_case(pred, dir / "pred");
    }
    const auto e = evaluate_segmentation(dir / "pred", dir / "gt");
    ASSERT_TRUE(e.unmatched.empty());
    ASSERT_EQ(e.case_count, 50u);
    std::map<std::string, std::array<double, 4>> sums;
    std::map<std::string, int> counts;
    for (const auto& r : e.rows) {
        auto& s = sums[r.class_name];
        s[0] += r.metrics.dice;
        s[1] += r.metrics.jaccard;
        s[2] += r.metrics.precision;
        s[3] += r.metrics.recall;
        ++counts[r.class_name];
    }
    for (const auto& [name, s] : sums) {
        for (int k = 0; k < 4; ++k) EXPECT_NEAR(e.class_means.at(name)[k], s[k] / counts[name], 1e-9) << name;
    }
}

TEST(Cli, EvalDxIdentityAndOffset) {
    const auto dir = fixture::scratch_dir("cli_dx");
    for (int i = 0; i < 6; ++i) write_phantom(phantom::random_spec(300 + i, "d" + std::to_string(i)), dir / "in");
    ASSERT_EQ(run("diagnose --case-dir " + (dir / "in").string() + " --out " + (dir / "rep").string()), 0);
    ASSERT_EQ(run("eval-dx --reports " + (dir / "rep").string() + " --truth " + (dir / "rep").string() + " --out " +
                  (dir / "same").string()),
              0);
    const auto same = nlohmann::json::parse(fixture::slurp(dir / "same" / "dx_summary.json"));
    EXPECT_EQ(same["cobb"]["mae"], 0.0);
    EXPECT_EQ(same["kang"]["accuracy"], 1.0);
    EXPECT_EQ(same["herniation"]["accuracy"], 1.0);

    fs::create_directories(dir / "shifted");
    for (int i = 0; i < 6; ++i) {
        const std::string id = "d" + std::to_string(i);
        auto j = nlohmann::json::parse(fixture::slurp(dir / "rep" / (id + ".report.json")));
        j["cobb"]["c2_c7_deg"] = j["cobb"]["c2_c7_deg"].get<double>() + 3.0;
        write_binary_file(dir / "shifted" / (id + ".report.json"), j.dump(2));
    }
    ASSERT_EQ(run("eval-dx --reports " + (dir / "rep").string() + " --truth " + (dir / "shifted").string() +
                  " --out " + (dir / "off").string()),
              0);
    const auto off = nlohmann::json::parse(fixture::slurp(dir / "off" / "dx_summary.json"));
    EXPECT_NEAR(off["cobb"]["mae"].get<double>(), 3.0, 1e-9);
    EXPECT_NEAR(off["cobb"]["mae_sd"].get<double>(), 0.0, 1e-9);

    ASSERT_EQ(run("eval-dx --reports " + (dir / "rep").string() + " --truth " + (dir / "in").string() + " --out " +
                  (dir / "truth").string()),
              0);
    EXPECT_TRUE(fs::exists(dir / "truth" / "dx_metrics.csv"));
}

TEST(BatchEval, ConfusionRowSumsMatchTruthCounts) {
    std::vector<DxPair> pairs;
    std::map<int, long> truth_counts;
    for (int i = 0; i < 20; ++i) {
        const auto ph = phantom::generate(phantom::random_spec(400 + i, "k" + std::to_string(i)));
        const auto d = diagnose(ph.case_data);
        pairs.push_back({ph.case_data.id, dx_record(d.report), dx_record(ph.truth)});
        for (const auto& l : ph.truth.levels) ++truth_counts[l.expected_grade];
    }
    const auto e = evaluate_diagnosis(pairs);
    ASSERT_TRUE(e.kang.has_value());
    const auto& conf = e.kang->confusion;
    for (std::size_t i = 0; i < conf.labels.size(); ++i) {
        long row = 0;
        for (long v : conf.counts[i]) row += v;
        EXPECT_EQ(row, truth_counts[conf.labels[i]]) << conf.labels[i];
    }
}
