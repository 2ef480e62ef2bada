#include "hahn/coherence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "hahn/quadrature.hpp"

namespace hahn {
namespace {

// Canonical (p, q) = (1 - q, q) with q = max(alpha, 1 - alpha). alpha and
// fl(1 - alpha) map to the same pair, which makes the alpha <-> 1-alpha
// symmetry exact in floating point.
std::pair<double, double> canonical_fractions(double alpha) {
    const double q = std::max(alpha, 1.0 - alpha);
    return {1.0 - q, q};
}

double sinc(double z) {
    if (std::abs(z) < 1e-4) return 1.0 - z * z / 6.0;
    return std::sin(z) / z;
}

void require_time(double total_time, const char* what) {
    if (!(std::isfinite(total_time) && total_time >= 0.0)) {
        throw DomainError(std::string(what) + ": total time must be finite and >= 0");
    }
}

// Sorted breakpoints in [lo, hi]: the ends, the given centers, and points at
// center +/- scale * 2^k so panels follow the kernel's own width.
std::vector<double> scaled_breakpoints(double lo, double hi, std::initializer_list<double> centers,
                                       double scale) {
    std::vector<double> pts{lo, hi};
    for (double c : centers) {
        if (c > lo && c < hi) pts.push_back(c);
        for (int k = -2; k <= 6; ++k) {
            const double d = scale * std::ldexp(1.0, k);
            for (double p : {c - d, c + d}) {
                if (p > lo && p < hi) pts.push_back(p);
            }
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace

void validate_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
}

void SequenceSpec::validate() const {
    validate_alpha(alpha);
    if (times.empty()) throw DomainError("SequenceSpec: empty time grid");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(std::isfinite(times[i]) && times[i] > 0.0)) {
            throw DomainError("SequenceSpec: times must be finite and > 0");
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw DomainError("SequenceSpec: times must be strictly increasing");
        }
    }
}

int control_function(double t, double total_time, double alpha) {
    validate_alpha(alpha);
    if (!(total_time > 0.0) || !(t >= 0.0 && t <= total_time)) {
        throw DomainError("control_function: t must lie in [0, T] with T > 0");
    }
    return t <= alpha * total_time ? 1 : -1;
}

double filter_function_over_omega_sq(double omega, double total_time, double alpha) {
    validate_alpha(alpha);
    require_time(total_time, "filter_function");
    // Fourier transform of f as the difference of two boxcars.
    const double a = alpha * total_time;
    const double c = (1.0 - alpha) * total_time;
    const std::complex<double> before =
        a * sinc(0.5 * omega * a) * std::polar(1.0, 0.5 * omega * a);
    const std::complex<double> after =
        c * sinc(0.5 * omega * c) * std::polar(1.0, 0.5 * omega * (a + total_time));
    return 0.5 * std::norm(before - after);
}

double filter_function(double omega, double total_time, double alpha) {
    validate_alpha(alpha);
    require_time(total_time, "filter_function");
    const double wt = omega * total_time;
    if (std::abs(wt) < 1.0) return omega * omega * filter_function_over_omega_sq(omega, total_time, alpha);
    const std::complex<double> z =
        2.0 * std::polar(1.0, alpha * wt) - 1.0 - std::polar(1.0, wt);
    return 0.5 * std::norm(z);
}

double decay_exponent(double x, double alpha) {
    validate_alpha(alpha);
    const auto [p, q] = canonical_fractions(alpha);
    if (x < 0.1) {
        // Series sum_{n>=2} (-x)^n/n! (2p^n + 2q^n - 1); the echo's x^2 term
        // vanishes exactly, which the expm1 form below only gets to ~1e-16 x.
        double term = 1.0, pn = 1.0, qn = 1.0, sum = 0.0;
        for (int n = 1; n <= 24; ++n) {
            term *= -x / n;
            pn *= p;
            qn *= q;
            if (n >= 2) sum += term * (2.0 * pn + 2.0 * qn - 1.0);
        }
        return std::max(0.0, sum);
    }
    // -3 + 2 + 2 - 1 = 0, so the expm1 form keeps small-x accuracy.
    const double paired = 2.0 * std::expm1(-p * x) + 2.0 * std::expm1(-q * x);
    return std::max(0.0, x + paired - std::expm1(-x));
}

double decay_exponent_derivative(double x, double alpha) {
    validate_alpha(alpha);
    const auto [p, q] = canonical_fractions(alpha);
    const double paired = -2.0 * p * std::expm1(-p * x) - 2.0 * q * std::expm1(-q * x);
    return paired + std::expm1(-x);
}

double log_coherence_closed_form(double total_time, double alpha, const NoiseParams& params) {
    require_time(total_time, "coherence_closed_form");
    params.validate();
    const double bt = params.product();
    return -bt * bt * decay_exponent(total_time / params.tau_c, alpha);
}

double coherence_closed_form(double total_time, double alpha, const NoiseParams& params) {
    return std::exp(log_coherence_closed_form(total_time, alpha, params));
}

double log_coherence_time_oracle(double total_time, double alpha, const NoiseParams& params,
                                 CorrelationKind kind) {
    require_time(total_time, "coherence_time_oracle");
    validate_alpha(alpha);
    params.validate();
    if (total_time == 0.0) return 0.0;

    struct Panel {
        double lo, hi;
        int sign;
    };
    const double pulse = alpha * total_time;
    std::vector<Panel> panels;
    if (pulse > 0.0) panels.push_back({0.0, pulse, +1});
    if (pulse < total_time) panels.push_back({pulse, total_time, -1});

    const double scale = params.tau_c;
    const double b2 = params.b * params.b;
    const QuadratureTolerance inner_tol{1e-15 * b2 * total_time, 1e-12, 30};
    const QuadratureTolerance outer_tol{1e-15 * b2 * total_time * total_time, 1e-11, 30};

    // Half of the double integral: sum over panel pairs with f(t1) f(t2).
    double total = 0.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        for (std::size_t j = i; j < panels.size(); ++j) {
            const Panel& outer = panels[i];
            const Panel& inner = panels[j];
            const auto inner_integral = [&](double t1) {
                const auto kernel = [&](double t2) { return correlation(t1 - t2, params, kind); };
                const auto pts = scaled_breakpoints(inner.lo, inner.hi, {t1}, scale);
                return integrate_piecewise(kernel, pts, inner_tol).value;
            };
            const auto pts =
                scaled_breakpoints(outer.lo, outer.hi, {outer.lo, outer.hi, inner.lo, inner.hi}, scale);
            const double value = integrate_piecewise(inner_integral, pts, outer_tol).value;
            const double weight = (i == j) ? 1.0 : 2.0;
            total += weight * outer.sign * inner.sign * value;
        }
    }
    return -0.5 * total;
}

double coherence_time_oracle(double total_time, double alpha, const NoiseParams& params,
                             CorrelationKind kind) {
    return std::exp(log_coherence_time_oracle(total_time, alpha, params, kind));
}

double log_coherence_freq_oracle(double total_time, double alpha, const NoiseParams& params) {
    require_time(total_time, "coherence_freq_oracle");
    validate_alpha(alpha);
    params.validate();
    if (total_time == 0.0) return 0.0;

    const double tc = params.tau_c;
    const double omega_max = std::max(200.0 / total_time, 200.0 / tc);
    // Full two-sided transform of the correlation; lorentzian_psd carries an
    // extra 1/(2 pi).
    const auto spectrum = [&](double w) { return 2.0 * std::numbers::pi * lorentzian_psd(w, params); };
    const auto integrand = [&](double w) {
        return spectrum(w) * filter_function_over_omega_sq(w, total_time, alpha) / std::numbers::pi;
    };

    std::vector<double> pts{0.0, omega_max};
    const double half_period = std::numbers::pi / total_time;
    for (double w = half_period; w < omega_max; w += half_period) pts.push_back(w);
    for (int k = -3; k <= 7; ++k) {
        const double w = std::ldexp(1.0, k) / tc;
        if (w < omega_max) pts.push_back(w);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    const double b2 = params.b * params.b;
    const QuadratureTolerance tol{1e-16 * b2 * total_time * total_time, 1e-11, 30};
    const double body = integrate_piecewise(integrand, pts, tol).value;

    // Tail beyond omega_max with F replaced by its mean over the oscillation:
    // 3 in general, 1 for FID where one cross term no longer averages out.
    const double f_mean = (alpha == 0.0 || alpha == 1.0) ? 1.0 : 3.0;
    const double y = 1.0 / (omega_max * tc);
    const double kernel_tail = tc * (y * y * y / 3.0 - std::pow(y, 5) / 5.0 + std::pow(y, 7) / 7.0);
    const double tail = 2.0 * b2 * tc * f_mean / std::numbers::pi * kernel_tail;
    return -(body + tail);
}

double coherence_freq_oracle(double total_time, double alpha, const NoiseParams& params) {
    return std::exp(log_coherence_freq_oracle(total_time, alpha, params));
}

double slow_noise_echo(double total_time, double t2) {
    if (!(t2 > 0.0)) throw DomainError("slow_noise_echo: T2 must be > 0");
    const double r = total_time / t2;
    return std::exp(-r * r * r);
}

double slow_noise_fid(double total_time, double t2star) {
    if (!(t2star > 0.0)) throw DomainError("slow_noise_fid: T2* must be > 0");
    const double r = total_time / t2star;
    return std::exp(-r * r);
}

double slow_noise_t2(const NoiseParams& params) {
    params.validate();
    return std::cbrt(12.0 * params.tau_c / (params.b * params.b));
}

double slow_noise_t2star(const NoiseParams& params) {
    params.validate();
    return std::numbers::sqrt2 / params.b;
}

double decay_time(double alpha, const NoiseParams& params, double level) {
    validate_alpha(alpha);
    params.validate();
    if (!(level > 0.0) || !std::isfinite(level)) throw DomainError("decay_time: level must be > 0");
    const double bt2 = params.product() * params.product();
    const auto excess = [&](double x) { return bt2 * decay_exponent(x, alpha) - level; };

    double lo = 0.0;
    double hi = 1.0;
    while (excess(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw NumericError("decay_time: coherence never reaches the level");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    return hi * params.tau_c;
}

}  // namespace hahn
