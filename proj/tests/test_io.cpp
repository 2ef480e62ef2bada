#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hahn/io.hpp"
#include "hahn/region.hpp"

namespace {

using hahn::NoiseParams;
namespace io = hahn::io;

const NoiseParams kReference = NoiseParams::from_khz(5.0, 100.0);

hahn::CoherenceCurve sample_curve() {
    const auto t = hahn::linear_time_grid(400.0, 20);
    return hahn::simulate_curve({0.3, t}, kReference, {1.0, 0.05, 1e4}, 17, 300000000);
}

TEST(FormatNumber, NineSignificantDigits) {
    EXPECT_EQ(io::format_number(0.1), "0.1");
    EXPECT_EQ(io::format_number(1.0 / 3.0), "0.333333333");
    EXPECT_EQ(io::format_number(2.5e-7), "2.5e-07");
}

TEST(Fnv1a, KnownVectors) {
    EXPECT_EQ(io::fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(io::fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(MaskEncoding, RoundTripProperty) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = rng() % 500;
        const double p = (rng() % 100) / 100.0;
        std::bernoulli_distribution bit(p);
        std::vector<std::uint8_t> mask(n);
        for (auto& m : mask) m = bit(rng) ? 1 : 0;
        EXPECT_EQ(io::decode_mask(io::encode_mask(mask)), mask);
    }
}

TEST(MaskEncoding, RunsAreCompact) {
    const std::vector<std::uint8_t> mask{0, 0, 0, 1, 1, 0};
    const auto j = io::encode_mask(mask);
    EXPECT_EQ(j["first"], 0);
    EXPECT_EQ(j["runs"], (std::vector<int>{3, 2, 1}));
}

TEST(CurveCsv, HeaderColumnsAndLineEndings) {
    std::ostringstream os;
    io::write_curve_csv(os, sample_curve(), {{"config_hash", "abc"}, {"seeds", "17"}});
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("# config_hash=abc\n# seeds=17\nT_us,W,sigma\n", 0), 0u);
    EXPECT_EQ(s.find('\r'), std::string::npos);
    std::size_t lines = 0;
    for (char ch : s) lines += ch == '\n';
    EXPECT_EQ(lines, 3u + 20u);
}

TEST(CurveJson, RoundTrip) {
    const auto c = sample_curve();
    const auto back = io::curve_from_json(io::curve_to_json(c));
    EXPECT_EQ(back.alpha, c.alpha);
    EXPECT_EQ(back.times, c.times);
    EXPECT_EQ(back.values, c.values);
    EXPECT_EQ(back.sigmas, c.sigmas);
    EXPECT_EQ(back.meta.seed, 17u);
    EXPECT_EQ(back.meta.stream, 300000000u);
    EXPECT_DOUBLE_EQ(back.meta.params.b, kReference.b);
    EXPECT_EQ(back.meta.model.n_avg, 1e4);
}

TEST(RegionJson, RoundTrip) {
    const auto m = hahn::scan_region(sample_curve(), hahn::GridSpec::around(kReference, 0.2, 5.0, 30));
    const auto back = io::region_from_json(io::region_to_json(m));
    EXPECT_EQ(back.b_grid, m.b_grid);
    EXPECT_EQ(back.tau_grid, m.tau_grid);
    EXPECT_EQ(back.chi2nu, m.chi2nu);
    EXPECT_EQ(back.mask, m.mask);
    EXPECT_EQ(back.threshold, m.threshold);
    ASSERT_TRUE(back.estimate.has_value());
    EXPECT_DOUBLE_EQ(back.estimate->tau_half, m.estimate->tau_half);
    EXPECT_EQ(back.argmin, m.argmin);
}

TEST(RegionCsv, OneRowPerCell) {
    const auto m = hahn::scan_region(sample_curve(), hahn::GridSpec::around(kReference, 0.2, 5.0, 12));
    std::ostringstream os;
    io::write_region_csv(os, m, {{"seeds", "17"}});
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# seeds=17");
    std::getline(in, line);
    EXPECT_EQ(line, "b_kHz,tau_c_us,chi2nu,accepted");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 144u);
}

TEST(CurveJson, RejectsMalformed) {
    auto j = io::curve_to_json(sample_curve());
    j["W"] = std::vector<double>{1.0};
    EXPECT_THROW(io::curve_from_json(j), std::exception);
}

}  // namespace
