#include <cmath>
#include <cstring>
#include <vector>

#include <gtest/gtest.h>

#include "hahn/simulation.hpp"

namespace {

using hahn::MeasurementModel;
using hahn::NoiseParams;

const NoiseParams kReference = NoiseParams::from_khz(5.0, 100.0);

double sample_std(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

TEST(EffectiveSigma, Values) {
    EXPECT_NEAR(hahn::effective_sigma({1.0, 0.05, 2.5e5}), std::sqrt(4e-6 + 0.0025), 1e-15);
    EXPECT_NEAR(hahn::effective_sigma({1.0, 0.05, 1e12}), 0.05, 1e-9);
    EXPECT_NEAR(hahn::effective_sigma({1.0, 0.05, 400.0}), 0.0707106781186547524, 1e-15);
    EXPECT_DOUBLE_EQ(hahn::effective_sigma({1.0, 0.0, 4.0}), 0.5);
}

TEST(EffectiveSigma, RejectsBadModels) {
    EXPECT_THROW((MeasurementModel{1.0, 0.0, 0.5}).validate(), hahn::DomainError);
    EXPECT_THROW((MeasurementModel{1.0, 0.0, 2.5}).validate(), hahn::DomainError);
    EXPECT_THROW((MeasurementModel{-1.0, 0.0, 1.0}).validate(), hahn::DomainError);
    EXPECT_THROW((MeasurementModel{1.0, -0.1, 1.0}).validate(), hahn::DomainError);
}

TEST(TimeGrid, EndsAtRequestedDecay) {
    for (double alpha : {0.0, 0.3, 0.5}) {
        const auto t = hahn::build_time_grid(kReference, alpha);
        ASSERT_EQ(t.size(), hahn::kDefaultGridPoints);
        const double w_end = hahn::coherence_closed_form(t.back(), alpha, kReference);
        EXPECT_NEAR(w_end, std::exp(-3.0), 1e-9) << alpha;
        EXPECT_NEAR(t.front(), t.back() / 100.0, 1e-12 * t.back());
    }
}

TEST(TimeGrid, MinimumSizeAndMonotone) {
    const auto t = hahn::build_time_grid(kReference, 0.5, 10);
    ASSERT_EQ(t.size(), 10u);
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t[i], t[i - 1]);
    EXPECT_THROW(hahn::build_time_grid(kReference, 0.5, 9), hahn::DomainError);
    EXPECT_EQ(hahn::build_time_grid(kReference, 0.5, 10), t);
}

TEST(Simulate, NoiselessCurveIsExact) {
    const auto t = hahn::build_time_grid(kReference, 0.3);
    const auto curve = hahn::simulate_curve({0.3, t}, kReference, {0.0, 0.0, 1.0}, 7);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_EQ(curve.values[i], hahn::coherence_closed_form(t[i], 0.3, kReference));
        EXPECT_EQ(curve.sigmas[i], 0.0);
    }
}

TEST(Simulate, SameSeedIsBitwiseIdentical) {
    const auto t = hahn::build_time_grid(kReference, 0.5);
    const MeasurementModel m{1.0, 0.05, 1e4};
    const auto a = hahn::simulate_curve({0.5, t}, kReference, m, 42, 3);
    const auto b = hahn::simulate_curve({0.5, t}, kReference, m, 42, 3);
    ASSERT_EQ(a.values.size(), b.values.size());
    EXPECT_EQ(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)), 0);
    const auto c = hahn::simulate_curve({0.5, t}, kReference, m, 43, 3);
    EXPECT_NE(a.values, c.values);
    const auto d = hahn::simulate_curve({0.5, t}, kReference, m, 42, 4);
    EXPECT_NE(a.values, d.values);
}

TEST(Simulate, ResidualSpreadMatchesSigma) {
    // sigma0 = 1, n_avg = 2.5e5, r = 0 -> 0.002.
    const auto t = hahn::linear_time_grid(300.0, 10000);
    const auto curve = hahn::simulate_curve({0.5, t}, kReference, {1.0, 0.0, 2.5e5}, 11);
    std::vector<double> res;
    for (std::size_t i = 0; i < t.size(); ++i) {
        res.push_back(curve.values[i] - hahn::coherence_closed_form(t[i], 0.5, kReference));
        EXPECT_DOUBLE_EQ(curve.sigmas[i], 0.002);
    }
    EXPECT_NEAR(sample_std(res) / 0.002, 1.0, 0.05);
}

TEST(Simulate, ShotNoiseScalesAsInverseRootN) {
    const auto t = hahn::linear_time_grid(300.0, 4000);
    double prev = 0.0;
    for (double n : {1e2, 1e4, 1e6}) {
        const auto curve = hahn::simulate_curve({0.0, t}, kReference, {1.0, 0.0, n}, 5);
        std::vector<double> res;
        for (std::size_t i = 0; i < t.size(); ++i) {
            res.push_back(curve.values[i] - hahn::coherence_closed_form(t[i], 0.0, kReference));
        }
        const double s = sample_std(res);
        EXPECT_NEAR(s * std::sqrt(n), 1.0, 0.06) << n;
        if (prev > 0.0) EXPECT_NEAR(prev / s, 10.0, 1.0);
        prev = s;
    }
}

TEST(Simulate, FloorDominatesAtLargeAverages) {
    for (double n : {4e4, 1e5, 2.5e5, 1e6}) {
        EXPECT_NEAR(hahn::effective_sigma({1.0, 0.05, n}) / 0.05, 1.0, 0.01) << n;
    }
}

TEST(Simulate, ValuesAreNotClipped) {
    const auto t = hahn::linear_time_grid(50.0, 200);
    const auto curve = hahn::simulate_curve({0.5, t}, kReference, {1.0, 0.0, 1.0}, 3);
    bool above_one = false;
    for (double w : curve.values) above_one |= w > 1.0;
    EXPECT_TRUE(above_one);
}

TEST(StandardNormal, Moments) {
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = hahn::standard_normal(9, 1, static_cast<std::uint64_t>(i));
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.015);
    EXPECT_NEAR(s4 / n, 3.0, 0.1);
}

TEST(Simulate, GaussianKindUsesOracle) {
    const std::vector<double> t{50.0, 100.0, 200.0};
    const auto curve =
        hahn::simulate_curve({0.5, t}, kReference, {0.0, 0.0, 1.0}, 1, 0, hahn::CorrelationKind::Gaussian);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_NEAR(curve.values[i],
                    hahn::coherence_time_oracle(t[i], 0.5, kReference, hahn::CorrelationKind::Gaussian), 1e-14);
    }
    EXPECT_EQ(curve.meta.kind, hahn::CorrelationKind::Gaussian);
}

}  // namespace
