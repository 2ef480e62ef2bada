#include "hahn/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hahn/least_squares.hpp"

namespace hahn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Weights {
    std::vector<double> w;
    bool unit = false;  // some sigma was zero
};

Weights make_weights(const CoherenceCurve& curve) {
    Weights out;
    out.unit = std::any_of(curve.sigmas.begin(), curve.sigmas.end(), [](double s) { return s == 0.0; });
    out.w.resize(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) out.w[i] = out.unit ? 1.0 : 1.0 / curve.sigmas[i];
    return out;
}

// Covariance of (x0, x1) from J^T J; scaled by residual variance when the
// weights carry no noise information.
std::pair<double, double> standard_errors(const LmResult& r, const Weights& w, int dof) {
    try {
        const Mat2 cov = invert(r.normal);
        const double scale = w.unit ? r.cost / dof : 1.0;
        return {std::sqrt(std::max(0.0, cov[0][0] * scale)), std::sqrt(std::max(0.0, cov[1][1] * scale))};
    } catch (const NumericError&) {
        return {kNaN, kNaN};
    }
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) {
        out[k] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * (k + 0.5) / n);
    }
    return out;
}

}  // namespace

double chi2_nu(const CoherenceCurve& curve, const NoiseParams& params, int n_fitted) {
    curve.validate();
    const int dof = static_cast<int>(curve.size()) - n_fitted;
    if (dof <= 0) throw DomainError("chi2_nu: degrees of freedom must be positive");
    double sum = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (!(curve.sigmas[i] > 0.0)) throw DomainError("chi2_nu: sigma must be > 0");
        const double model = coherence_closed_form(curve.times[i], curve.alpha, params);
        const double z = (curve.values[i] - model) / curve.sigmas[i];
        sum += z * z;
    }
    return sum / dof;
}

FitBounds FitBounds::around(const NoiseParams& init, double lo, double hi) {
    return FitBounds{init.b * lo, init.b * hi, init.tau_c * lo, init.tau_c * hi};
}

bool FitBounds::contains(const NoiseParams& p) const {
    return p.b >= b_min && p.b <= b_max && p.tau_c >= tau_min && p.tau_c <= tau_max;
}

void FitBounds::validate() const {
    if (!(b_min > 0.0 && b_max > b_min && tau_min > 0.0 && tau_max > tau_min) ||
        !std::isfinite(b_max) || !std::isfinite(tau_max)) {
        throw DomainError("FitBounds: need 0 < min < max on both axes");
    }
}

FitResult fit_closed_form(const CoherenceCurve& curve, const NoiseParams& init,
                          const FitBounds& bounds) {
    curve.validate();
    init.validate();
    bounds.validate();
    if (!bounds.contains(init)) throw DomainError("fit_closed_form: init outside bounds");
    const int dof = static_cast<int>(curve.size()) - kFittedParams;
    if (dof <= 0) throw DomainError("fit_closed_form: need more points than parameters");

    const Weights weights = make_weights(curve);
    // Parameters are (ln b, ln tau_c).
    const ResidualFn residuals = [&](const Vec2& x, std::vector<double>& r, std::vector<Vec2>& jac) {
        const double b = std::exp(x[0]);
        const double tau = std::exp(x[1]);
        const double bt2 = b * b * tau * tau;
        r.resize(curve.size());
        jac.resize(curve.size());
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const double xi = curve.times[i] / tau;
            const double g = decay_exponent(xi, curve.alpha);
            const double dg = decay_exponent_derivative(xi, curve.alpha);
            const double model = std::exp(-bt2 * g);
            const double dlog_b = -2.0 * bt2 * g;
            const double dlog_tau = -2.0 * bt2 * g + bt2 * xi * dg;
            r[i] = (curve.values[i] - model) * weights.w[i];
            jac[i] = {-weights.w[i] * model * dlog_b, -weights.w[i] * model * dlog_tau};
        }
    };

    const Vec2 lower{std::log(bounds.b_min), std::log(bounds.tau_min)};
    const Vec2 upper{std::log(bounds.b_max), std::log(bounds.tau_max)};
    std::vector<Vec2> starts{{std::log(init.b), std::log(init.tau_c)}};
    for (double b : log_spaced(bounds.b_min, bounds.b_max, 5)) {
        for (double t : log_spaced(bounds.tau_min, bounds.tau_max, 5)) {
            starts.push_back({std::log(b), std::log(t)});
        }
    }

    LmResult best;
    bool have_best = false;
    bool any_converged = false;
    for (const Vec2& s : starts) {
        const LmResult r = levenberg_marquardt(residuals, s, lower, upper);
        // Converged fits beat unconverged ones; ties broken by cost.
        const bool better = !have_best || (r.converged && !any_converged) ||
                            (r.converged == any_converged && r.cost < best.cost);
        if (better) {
            best = r;
            have_best = true;
            any_converged = any_converged || r.converged;
        }
    }

    FitResult out;
    out.params = NoiseParams{std::exp(best.x[0]), std::exp(best.x[1])};
    out.converged = best.converged;
    out.n_dof = dof;
    out.chi2nu_min = best.cost / dof;
    const auto [se_logb, se_logtau] = standard_errors(best, weights, dof);
    out.sigma_b = out.params.b * se_logb;
    out.sigma_tau = out.params.tau_c * se_logtau;
    if (!out.converged) throw FitError("fit_closed_form: no start converged", out);
    return out;
}

SlowNoiseFit fit_stretched_exponential(const CoherenceCurve& curve) {
    curve.validate();
    const int dof = static_cast<int>(curve.size()) - 2;
    if (dof <= 0) throw DomainError("fit_stretched_exponential: need more than two points");
    const Weights weights = make_weights(curve);

    // Parameters are (ln t_char, p).
    const ResidualFn residuals = [&](const Vec2& x, std::vector<double>& r, std::vector<Vec2>& jac) {
        const double log_t = x[0];
        const double p = x[1];
        r.resize(curve.size());
        jac.resize(curve.size());
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const double log_ratio = std::log(curve.times[i]) - log_t;
            const double z = std::exp(p * log_ratio);
            const double model = std::exp(-z);
            r[i] = (curve.values[i] - model) * weights.w[i];
            jac[i] = {-weights.w[i] * model * p * z, weights.w[i] * model * z * log_ratio};
        }
    };

    // Starting point from the linearization ln(-ln w) = p ln T - p ln t.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double w = curve.values[i];
        if (w > 0.02 && w < 0.98) {
            const double lx = std::log(curve.times[i]);
            const double ly = std::log(-std::log(w));
            sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
            ++n;
        }
    }
    const double t_span = curve.times.back();
    std::vector<Vec2> starts;
    if (n >= 2 && n * sxx - sx * sx > 0.0) {
        const double p = std::clamp((n * sxy - sx * sy) / (n * sxx - sx * sx), kStretchMin, kStretchMax);
        const double intercept = (sy - p * sx) / n;
        starts.push_back({-intercept / p, p});
    }
    for (double p : {1.0, 2.0, 3.0}) starts.push_back({std::log(0.5 * t_span), p});

    const Vec2 lower{std::log(t_span) - 20.0, kStretchMin};
    const Vec2 upper{std::log(t_span) + 20.0, kStretchMax};
    LmResult best;
    bool have_best = false;
    for (const Vec2& s : starts) {
        const LmResult r = levenberg_marquardt(residuals, s, lower, upper);
        if (!have_best || (r.converged && !best.converged) ||
            (r.converged == best.converged && r.cost < best.cost)) {
            best = r;
            have_best = true;
        }
    }
    if (!best.converged) throw NumericError("fit_stretched_exponential: did not converge");

    SlowNoiseFit out;
    out.t_char = std::exp(best.x[0]);
    out.p = best.x[1];
    out.converged = true;
    out.chi2nu_min = best.cost / dof;
    const auto [se_logt, se_p] = standard_errors(best, weights, dof);
    out.sigma_t = out.t_char * se_logt;
    out.sigma_p = se_p;
    return out;
}

SlowNoiseEstimate slow_noise_params(const SlowNoiseFit& echo_fit, const SlowNoiseFit& fid_fit) {
    if (!(echo_fit.t_char > 0.0 && fid_fit.t_char > 0.0)) {
        throw DomainError("slow_noise_params: characteristic times must be > 0");
    }
    const double t2 = echo_fit.t_char;
    const double t2s = fid_fit.t_char;
    const double b = std::numbers::sqrt2 / t2s;
    const double tau = t2 * t2 * t2 * b * b / 12.0;

    SlowNoiseEstimate out;
    out.params = NoiseParams{b, tau};
    out.sigma_b = std::numbers::sqrt2 / (t2s * t2s) * fid_fit.sigma_t;
    const double dtau_dt2 = 3.0 * t2 * t2 * b * b / 12.0;
    const double dtau_db = 2.0 * t2 * t2 * t2 * b / 12.0;
    out.sigma_tau = std::hypot(dtau_dt2 * echo_fit.sigma_t, dtau_db * out.sigma_b);
    return out;
}

}  // namespace hahn
