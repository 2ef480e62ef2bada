#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hahn/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using hahn::PipelineConfig;

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hahnecho_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

PipelineConfig small_config(const std::string& dir) {
    PipelineConfig c;
    c.scan.n_b = 40;
    c.scan.n_tau = 40;
    c.scan.threads = 1;
    c.output_dir = fresh_dir(dir).string();
    return c;
}

TEST(Config, DefaultsRoundTripThroughJson) {
    const PipelineConfig c;
    const auto back = hahn::config_from_json(hahn::config_to_json(c));
    EXPECT_EQ(hahn::config_to_json(back), hahn::config_to_json(c));
    EXPECT_EQ(hahn::config_hash(back), hahn::config_hash(c));
}

TEST(Config, ValidationListsEveryProblem) {
    PipelineConfig c;
    c.b_khz = -1.0;
    c.alphas = {1.5};
    c.n_avg = {0.5};
    c.scan.delta = 0.0;
    try {
        hahn::validate_and_normalize(c);
        FAIL() << "expected ValidationError";
    } catch (const hahn::ValidationError& e) {
        EXPECT_GE(e.problems().size(), 4u);
    }
}

TEST(Config, UnknownKeysAreReported) {
    auto j = hahn::config_to_json(PipelineConfig{});
    j["noise"]["bee"] = 3;
    j["extra"] = true;
    try {
        hahn::config_from_json(j);
        FAIL() << "expected ValidationError";
    } catch (const hahn::ValidationError& e) {
        EXPECT_EQ(e.problems().size(), 2u);
    }
}

TEST(Config, AlphaFoldingWarnsAndDeduplicates) {
    PipelineConfig c;
    c.alphas = {0.3, 0.7, 0.5, 0.0};
    const auto warnings = hahn::validate_and_normalize(c);
    EXPECT_EQ(c.alphas, (std::vector<double>{0.3, 0.5, 0.0}));
    EXPECT_FALSE(warnings.empty());
}

TEST(Config, HashIgnoresOutputSettings) {
    PipelineConfig a, b;
    b.output_dir = "elsewhere";
    b.write_csv = false;
    b.scan.threads = 7;
    EXPECT_EQ(hahn::config_hash(a), hahn::config_hash(b));
    b.seeds = {2};
    EXPECT_NE(hahn::config_hash(a), hahn::config_hash(b));
}

TEST(Feasibility, RatioAndWarning) {
    // Reference regime (5 kHz, 100 us): the echo outlives the FID only modestly.
    const double ref = hahn::coherence_time_ratio(hahn::NoiseParams::from_khz(5.0, 100.0));
    EXPECT_GT(ref, 1.0);
    EXPECT_LT(ref, 5.0);
    // Slow-noise limit: T2 / T2* -> (12 b tau_c)^(1/3) / sqrt(2).
    const auto slow = hahn::NoiseParams::from_khz(100.0, 1e7);
    EXPECT_NEAR(hahn::coherence_time_ratio(slow) / (std::cbrt(12.0 * slow.product()) / std::sqrt(2.0)), 1.0, 0.02);

    PipelineConfig c = small_config("feasibility");
    c.b_khz = 100.0;
    c.tau_us = 1e7;
    const auto report = hahn::cmd_curve(c);
    bool warned = false;
    for (const auto& w : report.warnings) warned |= w.find("timing") != std::string::npos;
    EXPECT_TRUE(warned);
}

TEST(CurveCommand, CsvMatchesClosedForm) {
    PipelineConfig c = small_config("curve");
    c.alphas = {0.2};
    const auto report = hahn::cmd_curve(c);
    ASSERT_EQ(report.exit_code, 0);
    std::ifstream in(fs::path(c.output_dir) / "curve_alpha0.2.csv");
    ASSERT_TRUE(in);
    std::string line;
    int rows = 0;
    const auto params = c.noise();
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'T') continue;
        std::istringstream row(line);
        double t = 0, w = 0;
        char comma = 0;
        row >> t >> comma >> w;
        EXPECT_NEAR(w, hahn::coherence_closed_form(t, 0.2, params), 1e-8);
        ++rows;
    }
    EXPECT_EQ(rows, 100);
}

TEST(ScanCommand, RerunsAreByteIdentical) {
    PipelineConfig a = small_config("rerun_a");
    PipelineConfig b = small_config("rerun_b");
    b.scan.threads = 2;
    const auto ra = hahn::cmd_scan(a);
    const auto rb = hahn::cmd_scan(b);
    ASSERT_EQ(ra.files.size(), rb.files.size());
    ASSERT_FALSE(ra.files.empty());
    for (std::size_t k = 0; k < ra.files.size(); ++k) {
        EXPECT_EQ(ra.files[k].filename(), rb.files[k].filename());
        EXPECT_EQ(slurp(ra.files[k]), slurp(rb.files[k])) << ra.files[k];
    }
}

TEST(IntersectCommand, SingleAlphaEqualsEchoScan) {
    PipelineConfig c = small_config("single");
    const auto run = hahn::run_intersection(c, 1, 2.5e5);
    ASSERT_EQ(run.regions.size(), 1u);
    EXPECT_EQ(run.combined.mask, run.echo.mask);
    EXPECT_EQ(run.combined.mask, run.regions[0].mask);
    const auto imp = hahn::improvement_ratio(run.echo, run.combined);
    EXPECT_DOUBLE_EQ(imp.combined, 1.0);
}

TEST(IntersectCommand, EmptyIntersectionExitsWithFour) {
    // A vanishing delta leaves only each curve's best cell; they differ.
    PipelineConfig c = small_config("empty");
    c.alphas = {0.0, 0.5};
    c.scan.delta = 1e-12;
    const auto report = hahn::cmd_intersect(c);
    EXPECT_EQ(report.exit_code, 4);
    EXPECT_FALSE(report.warnings.empty());
}

TEST(SlownoiseCommand, TableHasAllMethods) {
    PipelineConfig c = small_config("slownoise");
    const auto report = hahn::cmd_slownoise(c);
    const std::string table = slurp(fs::path(c.output_dir) / "slownoise_table.csv");
    for (const char* m : {"true,", "slow_noise,", "explicit_echo,", "explicit_fid,"}) {
        EXPECT_NE(table.find(m), std::string::npos) << m;
    }
    EXPECT_EQ(report.exit_code, 0);
}

TEST(SlownoiseCommand, AgreesWithExplicitFitWhenNoiseIsSlow) {
    // b = 50 kHz, tau_c = 10 ms: the grids stay at x <~ 0.05, where the
    // slow-noise forms are within ~0.375 x of the exact exponents.
    PipelineConfig c = small_config("slownoise_slow");
    c.b_khz = 50.0;
    c.tau_us = 1e4;
    const auto report = hahn::cmd_slownoise(c);
    const auto& rows = report.summary["rows"];
    ASSERT_EQ(rows.size(), 4u);
    const auto& slow = rows[1];
    const auto& explicit_fit = rows[2];
    EXPECT_EQ(slow["method"], "slow_noise");
    EXPECT_NEAR(slow["b_kHz"].get<double>() / explicit_fit["b_kHz"].get<double>(), 1.0, 0.02);
    EXPECT_NEAR(slow["tau_c_us"].get<double>() / explicit_fit["tau_c_us"].get<double>(), 1.0, 0.02);
    EXPECT_NEAR(explicit_fit["tau_c_us"].get<double>(), 1e4, 1e-2);
}

TEST(Output, UnwritableDirectoryIsIoError) {
    PipelineConfig c = small_config("io");
    const fs::path blocker = fs::temp_directory_path() / "hahnecho_test_blocker";
    std::ofstream(blocker) << "x";
    c.output_dir = (blocker / "sub").string();
    EXPECT_THROW(hahn::cmd_curve(c), std::ios_base::failure);
    fs::remove(blocker);
}

}  // namespace
