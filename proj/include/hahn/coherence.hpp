// coherence.hpp — coherence W(T, alpha) of a spin qubit under a single
// instantaneous pi-pulse at time alpha*T, for a classical Gaussian bath.
//
// Three independent evaluators are provided:
//   * coherence_closed_form  — analytic result for the exponential (OU) bath,
//   * coherence_time_oracle  — double time integral of f f s over [0,T]^2,
//   * coherence_freq_oracle  — filter-function integral over frequency.
// All work in the log domain; W = exp(log W) is taken last.

#pragma once

#include <vector>

#include "hahn/noise.hpp"

namespace hahn {

struct SequenceSpec {
    double alpha = 0.5;         // pulse fraction in [0, 1]; 0 and 1 are FID, 0.5 is Hahn echo
    std::vector<double> times;  // total evolution times [us], strictly increasing, > 0

    void validate() const;
};

void validate_alpha(double alpha);

/// +1 before the pulse (including t == alpha*T), -1 after.
int control_function(double t, double total_time, double alpha);

/// F(wT) = (w^2/2) |int_0^T f(t) e^{iwt} dt|^2 for the single-pulse control.
double filter_function(double omega, double total_time, double alpha);

/// F(wT)/w^2, evaluated without cancellation at small w.
double filter_function_over_omega_sq(double omega, double total_time, double alpha);

/// Dimensionless decay exponent g(x, alpha) = x - 3 + 2e^{-alpha x} +
/// 2e^{-(1-alpha)x} - e^{-x}, so that log W = -(b tau_c)^2 g(T/tau_c, alpha).
/// Symmetric in alpha <-> 1-alpha bit for bit.
double decay_exponent(double x, double alpha);

/// dg/dx.
double decay_exponent_derivative(double x, double alpha);

double log_coherence_closed_form(double total_time, double alpha, const NoiseParams& params);
double coherence_closed_form(double total_time, double alpha, const NoiseParams& params);

double log_coherence_time_oracle(double total_time, double alpha, const NoiseParams& params,
                                 CorrelationKind kind);
double coherence_time_oracle(double total_time, double alpha, const NoiseParams& params,
                             CorrelationKind kind);

/// Lorentzian spectrum only.
double log_coherence_freq_oracle(double total_time, double alpha, const NoiseParams& params);
double coherence_freq_oracle(double total_time, double alpha, const NoiseParams& params);

// Slow-noise (T << tau_c) limits.
double slow_noise_echo(double total_time, double t2);
double slow_noise_fid(double total_time, double t2star);

/// T2 = (12 tau_c / b^2)^{1/3}.
double slow_noise_t2(const NoiseParams& params);
/// T2* = sqrt(2) / b.
double slow_noise_t2star(const NoiseParams& params);

/// First T at which the closed-form W drops to exp(-level), by bisection.
double decay_time(double alpha, const NoiseParams& params, double level);

}  // namespace hahn
