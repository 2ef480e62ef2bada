// estimation.hpp — least-squares extraction of (b, tau_c) from coherence
// curves, and the slow-noise stretched-exponential pipeline.

#pragma once

#include <stdexcept>

#include "hahn/coherence.hpp"
#include "hahn/simulation.hpp"

namespace hahn {

inline constexpr int kFittedParams = 2;

/// (1/nu) sum ((w_i - W(T_i))/sigma_i)^2 with nu = n - n_fitted. Throws
/// DomainError for sigma_i <= 0 or nu <= 0.
double chi2_nu(const CoherenceCurve& curve, const NoiseParams& params, int n_fitted = kFittedParams);

struct FitBounds {
    double b_min = 0.0, b_max = 0.0;      // [1/us]
    double tau_min = 0.0, tau_max = 0.0;  // [us]

    /// [lo, hi] x init on each axis.
    static FitBounds around(const NoiseParams& init, double lo = 0.05, double hi = 20.0);
    bool contains(const NoiseParams& p) const;
    void validate() const;
};

struct FitResult {
    NoiseParams params;
    double sigma_b = 0.0;    // 1-sigma from local curvature [1/us]
    double sigma_tau = 0.0;  // [us]
    double chi2nu_min = 0.0;
    bool converged = false;
    int n_dof = 0;
};

class FitError : public NumericError {
public:
    FitError(const std::string& what, FitResult best) : NumericError(what), best_(best) {}
    const FitResult& best() const { return best_; }

private:
    FitResult best_;
};

/// Damped least squares of the closed-form coherence, multi-started from a
/// 5x5 log-spaced grid inside the bounds (plus init). Weights are 1/sigma_i;
/// if any sigma_i is zero the fit is unweighted and the covariance is scaled
/// by the residual variance.
FitResult fit_closed_form(const CoherenceCurve& curve, const NoiseParams& init,
                          const FitBounds& bounds);

struct SlowNoiseFit {
    double t_char = 0.0;  // [us]
    double p = 0.0;
    double sigma_t = 0.0;
    double sigma_p = 0.0;
    double chi2nu_min = 0.0;
    bool converged = false;
};

inline constexpr double kStretchMin = 0.5;
inline constexpr double kStretchMax = 4.0;

/// Fit of exp(-(T/t_char)^p), amplitude fixed at 1, p in [0.5, 4].
SlowNoiseFit fit_stretched_exponential(const CoherenceCurve& curve);

struct SlowNoiseEstimate {
    NoiseParams params;
    double sigma_b = 0.0;
    double sigma_tau = 0.0;
};

/// b = sqrt(2)/T2*, tau_c = T2^3 b^2 / 12, first-order error propagation.
SlowNoiseEstimate slow_noise_params(const SlowNoiseFit& echo_fit, const SlowNoiseFit& fid_fit);

}  // namespace hahn
