// simulation.hpp — synthetic coherence measurements with shot noise and a
// signal-independent noise floor, reproducible from a seed.

#pragma once

#include <cstdint>
#include <vector>

#include "hahn/coherence.hpp"
#include "hahn/noise.hpp"

namespace hahn {

struct MeasurementModel {
    double sigma0 = 1.0;    // per-average relative noise (SNR of 1 -> 1.0)
    double r = 0.0;         // noise-floor fraction
    double n_avg = 1.0;     // number of averages, integral and >= 1

    void validate() const;
};

/// sqrt(sigma0^2 / n_avg + r^2).
double effective_sigma(const MeasurementModel& model);

struct CurveProvenance {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;  // e.g. index of alpha within a pipeline
    MeasurementModel model;
    NoiseParams params;
    CorrelationKind kind = CorrelationKind::Exponential;
};

struct CoherenceCurve {
    double alpha = 0.5;
    std::vector<double> times;   // [us]
    std::vector<double> values;  // measured W
    std::vector<double> sigmas;  // per-point standard deviation, >= 0
    CurveProvenance meta;

    std::size_t size() const { return times.size(); }
    /// Lengths agree, times strictly increasing and positive, sigmas >= 0.
    void validate() const;
};

inline constexpr std::size_t kDefaultGridPoints = 100;
inline constexpr double kDefaultDecayExponent = 3.0;

/// n_points times spaced linearly from T_max/n to T_max, where W(T_max) =
/// exp(-decay_exponent) for the given alpha.
std::vector<double> build_time_grid(const NoiseParams& params, double alpha,
                                    std::size_t n_points = kDefaultGridPoints,
                                    double decay_exponent = kDefaultDecayExponent);

/// Same spacing with an explicit T_max.
std::vector<double> linear_time_grid(double t_max, std::size_t n_points);

/// Standard normal deviate for (seed, stream, index); a pure function, so
/// points can be generated in any order.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// w_i = W_exact(T_i) + N(0, sigma_eff^2), unclipped. The exact curve uses the
/// closed form for the exponential kind and the time-domain oracle otherwise.
CoherenceCurve simulate_curve(const SequenceSpec& seq, const NoiseParams& params,
                              const MeasurementModel& model, std::uint64_t seed,
                              std::uint64_t stream = 0,
                              CorrelationKind kind = CorrelationKind::Exponential);

}  // namespace hahn
