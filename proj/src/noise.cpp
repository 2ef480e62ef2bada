#include "hahn/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hahn/quadrature.hpp"

namespace hahn {
namespace {

constexpr double kTruncationInTauC = 40.0;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite argument");
}

}  // namespace

void NoiseParams::validate() const {
    if (!(std::isfinite(b) && b > 0.0)) throw DomainError("NoiseParams: b must be finite and > 0");
    if (!(std::isfinite(tau_c) && tau_c > 0.0)) {
        throw DomainError("NoiseParams: tau_c must be finite and > 0");
    }
    if (!std::isfinite(b * tau_c)) throw DomainError("NoiseParams: b*tau_c overflows");
}

std::string to_string(CorrelationKind kind) {
    switch (kind) {
        case CorrelationKind::Exponential: return "exponential";
        case CorrelationKind::Gaussian: return "gaussian";
    }
    return "unknown";
}

CorrelationKind correlation_kind_from_string(const std::string& name) {
    if (name == "exponential" || name == "ou" || name == "lorentzian") {
        return CorrelationKind::Exponential;
    }
    if (name == "gaussian") return CorrelationKind::Gaussian;
    throw DomainError("unknown correlation kind '" + name + "'");
}

double lorentzian_psd(double omega, const NoiseParams& params) {
    require_finite(omega, "lorentzian_psd");
    params.validate();
    const double wt = omega * params.tau_c;
    return params.b * params.b * params.tau_c / std::numbers::pi / (wt * wt + 1.0);
}

double correlation(double t, const NoiseParams& params, CorrelationKind kind) {
    require_finite(t, "correlation");
    params.validate();
    const double b2 = params.b * params.b;
    const double u = std::abs(t) / params.tau_c;
    switch (kind) {
        case CorrelationKind::Exponential: return b2 * std::exp(-u);
        case CorrelationKind::Gaussian: return b2 * std::exp(-u * u);
    }
    throw DomainError("correlation: unknown kind");
}

double correlation_transform(double omega, const NoiseParams& params, CorrelationKind kind) {
    require_finite(omega, "correlation_transform");
    params.validate();
    const double w = std::abs(omega);
    const double t_end = kTruncationInTauC * params.tau_c;

    // Breakpoints at every half period keep each panel free of sign changes,
    // plus a few at the kernel's own scale.
    std::vector<double> points{0.0};
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) points.push_back(t * params.tau_c);
    if (w > 0.0) {
        const double half_period = std::numbers::pi / w;
        const auto n = static_cast<std::size_t>(t_end / half_period);
        for (std::size_t k = 1; k <= n; ++k) points.push_back(static_cast<double>(k) * half_period);
    }
    points.push_back(t_end);
    std::sort(points.begin(), points.end());

    const auto integrand = [&](double t) { return std::cos(w * t) * correlation(t, params, kind); };
    const QuadratureTolerance tol{1e-12 * params.b * params.b * params.tau_c, 1e-11, 30};
    return 2.0 * integrate_piecewise(integrand, points, tol).value;
}

std::vector<double> psd_from_correlation(const NoiseParams& params, CorrelationKind kind,
                                         std::span<const double> omega_grid) {
    std::vector<double> out;
    out.reserve(omega_grid.size());
    for (double w : omega_grid) {
        out.push_back(correlation_transform(w, params, kind) / (2.0 * std::numbers::pi));
    }
    return out;
}

}  // namespace hahn
