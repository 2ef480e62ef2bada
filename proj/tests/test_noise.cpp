#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hahn/noise.hpp"
#include "hahn/quadrature.hpp"

namespace {

using hahn::CorrelationKind;
using hahn::NoiseParams;

const NoiseParams kReference = NoiseParams::from_khz(5.0, 100.0);

TEST(NoiseParams, KilohertzConvention) {
    EXPECT_DOUBLE_EQ(kReference.b, 5e-3);
    EXPECT_DOUBLE_EQ(kReference.product(), 0.5);
    EXPECT_DOUBLE_EQ(kReference.b_khz(), 5.0);
}

TEST(NoiseParams, RejectsNonPositive) {
    EXPECT_THROW((NoiseParams{0.0, 1.0}).validate(), hahn::DomainError);
    EXPECT_THROW((NoiseParams{1.0, -1.0}).validate(), hahn::DomainError);
    EXPECT_THROW((NoiseParams{std::numeric_limits<double>::infinity(), 1.0}).validate(), hahn::DomainError);
}

TEST(LorentzianPsd, ValueAtZero) {
    // b^2 tau_c / pi = 2.5e-3 / pi, evaluated at 30 digits.
    EXPECT_NEAR(hahn::lorentzian_psd(0.0, kReference), 7.95774715459476678844e-4, 1e-18);
}

TEST(LorentzianPsd, HalfWidthAtInverseCorrelationTime) {
    const double peak = hahn::lorentzian_psd(0.0, kReference);
    EXPECT_DOUBLE_EQ(hahn::lorentzian_psd(1.0 / kReference.tau_c, kReference), 0.5 * peak);
}

TEST(LorentzianPsd, EvenAndPositive) {
    for (double w = 0.0; w < 1.0; w += 0.0137) {
        EXPECT_EQ(hahn::lorentzian_psd(w, kReference), hahn::lorentzian_psd(-w, kReference));
        EXPECT_GT(hahn::lorentzian_psd(w, kReference), 0.0);
    }
}

TEST(LorentzianPsd, RejectsNonFiniteFrequency) {
    EXPECT_THROW(hahn::lorentzian_psd(std::nan(""), kReference), hahn::DomainError);
    EXPECT_THROW(hahn::lorentzian_psd(std::numeric_limits<double>::infinity(), kReference), hahn::DomainError);
}

TEST(Correlation, ExponentialValues) {
    EXPECT_DOUBLE_EQ(hahn::correlation(0.0, kReference, CorrelationKind::Exponential), 25e-6);
    EXPECT_NEAR(hahn::correlation(100.0, kReference, CorrelationKind::Exponential), 9.19698602928605804e-6, 1e-20);
}

TEST(Correlation, KindsCoincideAtCorrelationTime) {
    EXPECT_EQ(hahn::correlation(100.0, kReference, CorrelationKind::Exponential),
              hahn::correlation(100.0, kReference, CorrelationKind::Gaussian));
}

TEST(Correlation, EvenWithMaximumAtZero) {
    for (auto kind : {CorrelationKind::Exponential, CorrelationKind::Gaussian}) {
        const double peak = hahn::correlation(0.0, kReference, kind);
        for (double t = 0.5; t < 500.0; t *= 1.7) {
            EXPECT_EQ(hahn::correlation(t, kReference, kind), hahn::correlation(-t, kReference, kind));
            EXPECT_LT(hahn::correlation(t, kReference, kind), peak);
        }
    }
}

TEST(PsdFromCorrelation, MatchesLorentzianOnGrid) {
    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(0.5 * k / kReference.tau_c);  // [0, 20/tau_c]
    const auto numeric = hahn::psd_from_correlation(kReference, CorrelationKind::Exponential, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double exact = hahn::lorentzian_psd(grid[k], kReference);
        EXPECT_NEAR(numeric[k] / exact, 1.0, 1e-8) << "omega=" << grid[k];
    }
}

TEST(PsdFromCorrelation, GaussianIntegralAtZero) {
    // int s(t) dt over the real line = b^2 tau_c sqrt(pi).
    const double raw = hahn::correlation_transform(0.0, kReference, CorrelationKind::Gaussian);
    EXPECT_NEAR(raw / (25e-6 * 100.0 * std::sqrt(std::numbers::pi)), 1.0, 1e-10);
    const std::vector<double> zero{0.0};
    const auto psd = hahn::psd_from_correlation(kReference, CorrelationKind::Gaussian, zero);
    EXPECT_NEAR(psd[0] * 2.0 * std::numbers::pi / raw, 1.0, 1e-14);
}

TEST(PsdFromCorrelation, GaussianTransformMatchesAnalytic) {
    // Fourier transform of b^2 exp(-(t/tc)^2) is b^2 tc sqrt(pi) exp(-(w tc)^2/4).
    for (double wt : {0.3, 1.0, 2.5, 5.0}) {
        const double w = wt / kReference.tau_c;
        const double exact = 25e-6 * 100.0 * std::sqrt(std::numbers::pi) * std::exp(-wt * wt / 4.0);
        EXPECT_NEAR(hahn::correlation_transform(w, kReference, CorrelationKind::Gaussian) / exact, 1.0, 1e-8);
    }
}

TEST(LorentzianPsd, TotalPowerEqualsVarianceOfNoise) {
    // 2 int_0^inf S dw = s(0) = b^2 in this normalization; tail beyond W is
    // b^2 / (pi W tau_c) to leading order.
    const double w_max = 1e4 / kReference.tau_c;
    const std::vector<double> pts{0.0, 1.0 / kReference.tau_c, 10.0 / kReference.tau_c, 100.0 / kReference.tau_c, w_max};
    const auto body = hahn::integrate_piecewise([](double w) { return hahn::lorentzian_psd(w, kReference); }, pts);
    const double tail = 25e-6 / (std::numbers::pi * w_max * kReference.tau_c);
    EXPECT_NEAR(2.0 * (body.value + tail) / 25e-6, 1.0, 1e-6);
}

TEST(CorrelationKind, StringRoundTrip) {
    for (auto kind : {CorrelationKind::Exponential, CorrelationKind::Gaussian}) {
        EXPECT_EQ(hahn::correlation_kind_from_string(hahn::to_string(kind)), kind);
    }
    EXPECT_THROW(hahn::correlation_kind_from_string("lognormal"), hahn::DomainError);
}

TEST(Quadrature, ReportsNonConvergence) {
    hahn::QuadratureTolerance tight{0.0, 1e-15, 2};
    EXPECT_THROW(hahn::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, tight),
                 hahn::NumericError);
}

}  // namespace
