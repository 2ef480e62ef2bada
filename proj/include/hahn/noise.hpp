// noise.hpp — bath noise models: Lorentzian spectrum, correlation functions,
// and the numerical Fourier transform linking them.
//
// Units: time in microseconds, rates in inverse microseconds. Coupling
// strengths are usually quoted in kHz (10^3 s^-1, no 2*pi), which is
// 1e-3 us^-1; see NoiseParams::from_khz.

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hahn {

/// Invalid argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numerical failure (quadrature or optimizer did not reach tolerance).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kKhzToPerUs = 1e-3;

struct NoiseParams {
    double b = 0.0;      // coupling strength [1/us]
    double tau_c = 0.0;  // bath correlation time [us]

    static NoiseParams from_khz(double b_khz, double tau_us) {
        return NoiseParams{b_khz * kKhzToPerUs, tau_us};
    }

    double b_khz() const { return b / kKhzToPerUs; }
    double product() const { return b * tau_c; }  // dimensionless b*tau_c

    /// Throws DomainError unless b and tau_c are finite and positive.
    void validate() const;
};

enum class CorrelationKind { Exponential, Gaussian };

std::string to_string(CorrelationKind kind);
CorrelationKind correlation_kind_from_string(const std::string& name);

/// S(w) = b^2 tau_c / pi * 1 / ((w tau_c)^2 + 1). Even in w.
double lorentzian_psd(double omega, const NoiseParams& params);

/// s(t) = b^2 exp(-|t|/tau_c) (Exponential) or b^2 exp(-(t/tau_c)^2) (Gaussian).
double correlation(double t, const NoiseParams& params, CorrelationKind kind);

/// Raw transform int e^{iwt} s(t) dt over the real line, by adaptive quadrature
/// of 2 int_0^inf cos(wt) s(t) dt truncated at 40 tau_c.
double correlation_transform(double omega, const NoiseParams& params, CorrelationKind kind);

/// Spectral density in the same normalization as lorentzian_psd, i.e.
/// correlation_transform / (2 pi). For the Exponential kind this reproduces
/// lorentzian_psd.
std::vector<double> psd_from_correlation(const NoiseParams& params, CorrelationKind kind,
                                         std::span<const double> omega_grid);

}  // namespace hahn
