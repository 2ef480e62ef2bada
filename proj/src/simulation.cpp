#include "hahn/simulation.hpp"

#include <cmath>
#include <numbers>

namespace hahn {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in (0, 1): 53 random bits, offset by half an ulp so log() is finite.
double to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

void MeasurementModel::validate() const {
    if (!(std::isfinite(sigma0) && sigma0 >= 0.0)) throw DomainError("MeasurementModel: sigma0 must be >= 0");
    if (!(std::isfinite(r) && r >= 0.0)) throw DomainError("MeasurementModel: r must be >= 0");
    if (!(std::isfinite(n_avg) && n_avg >= 1.0 && n_avg == std::floor(n_avg))) {
        throw DomainError("MeasurementModel: n_avg must be an integer >= 1");
    }
}

double effective_sigma(const MeasurementModel& model) {
    model.validate();
    return std::sqrt(model.sigma0 * model.sigma0 / model.n_avg + model.r * model.r);
}

void CoherenceCurve::validate() const {
    validate_alpha(alpha);
    if (values.size() != times.size() || sigmas.size() != times.size()) {
        throw DomainError("CoherenceCurve: times, values and sigmas differ in length");
    }
    if (times.empty()) throw DomainError("CoherenceCurve: empty");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(std::isfinite(times[i]) && times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
            throw DomainError("CoherenceCurve: times must be positive and strictly increasing");
        }
        if (!std::isfinite(values[i])) throw DomainError("CoherenceCurve: non-finite value");
        if (!(std::isfinite(sigmas[i]) && sigmas[i] >= 0.0)) {
            throw DomainError("CoherenceCurve: sigmas must be finite and >= 0");
        }
    }
}

std::vector<double> linear_time_grid(double t_max, std::size_t n_points) {
    if (n_points == 0) throw DomainError("linear_time_grid: need at least one point");
    if (!(std::isfinite(t_max) && t_max > 0.0)) throw DomainError("linear_time_grid: T_max must be > 0");
    std::vector<double> times(n_points);
    const double n = static_cast<double>(n_points);
    for (std::size_t i = 0; i < n_points; ++i) times[i] = t_max * static_cast<double>(i + 1) / n;
    return times;
}

std::vector<double> build_time_grid(const NoiseParams& params, double alpha, std::size_t n_points,
                                    double decay_exponent) {
    if (n_points < 10) throw DomainError("build_time_grid: n_points must be >= 10");
    return linear_time_grid(decay_time(alpha, params, decay_exponent), n_points);
}

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t key = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
    const double u1 = to_open_unit(splitmix64(key));
    const double u2 = to_open_unit(splitmix64(key ^ 0xd1b54a32d192ed03ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CoherenceCurve simulate_curve(const SequenceSpec& seq, const NoiseParams& params,
                              const MeasurementModel& model, std::uint64_t seed,
                              std::uint64_t stream, CorrelationKind kind) {
    seq.validate();
    params.validate();
    const double sigma = effective_sigma(model);

    CoherenceCurve curve;
    curve.alpha = seq.alpha;
    curve.times = seq.times;
    curve.values.resize(seq.times.size());
    curve.sigmas.assign(seq.times.size(), sigma);
    curve.meta = CurveProvenance{seed, stream, model, params, kind};
    for (std::size_t i = 0; i < seq.times.size(); ++i) {
        const double exact = kind == CorrelationKind::Exponential
                                 ? coherence_closed_form(seq.times[i], seq.alpha, params)
                                 : coherence_time_oracle(seq.times[i], seq.alpha, params, kind);
        curve.values[i] = sigma == 0.0 ? exact : exact + sigma * standard_normal(seed, stream, i);
    }
    return curve;
}

}  // namespace hahn
