// pipeline.hpp — configuration and the four experiment pipelines (curve,
// scan, intersect, slownoise) behind the command-line tool.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hahn/io.hpp"
#include "hahn/region.hpp"
#include "hahn/simulation.hpp"

namespace hahn {

inline constexpr int kConfigSchemaVersion = 1;

// Shared measurement window used by scan/intersect unless overridden: every
// alpha is sampled up to the time where the echo curve reaches exp(-0.6).
inline constexpr double kScanDecayExponent = 0.6;
inline constexpr double kScanReferenceAlpha = 0.5;

struct GridPolicy {
    std::size_t n_points = kDefaultGridPoints;
    // Unset fields take the command's default.
    std::optional<double> decay_exponent;
    std::optional<double> reference_alpha;  // shared window from this alpha
    std::optional<double> t_max_us;         // explicit window, wins over the rest
};

struct ScanConfig {
    std::optional<double> guess_b_khz;   // grid center; defaults to the noise params
    std::optional<double> guess_tau_us;
    double lo_factor = 0.2;
    double hi_factor = 5.0;
    std::size_t n_b = 200;
    std::size_t n_tau = 200;
    double delta = kDefaultDelta;
    unsigned threads = 0;
};

struct FitConfig {
    double lo_factor = 0.05;
    double hi_factor = 20.0;
};

struct PipelineConfig {
    double b_khz = 5.0;
    double tau_us = 100.0;
    CorrelationKind kind = CorrelationKind::Exponential;

    std::vector<double> alphas{0.5};
    GridPolicy grid;

    double sigma0 = 1.0;
    double r = 0.05;
    std::vector<double> n_avg{2.5e5};

    ScanConfig scan;
    FitConfig fit;

    std::vector<std::uint64_t> seeds{1};

    std::string output_dir = "out";
    bool write_csv = true;
    bool write_json = true;

    NoiseParams noise() const { return NoiseParams::from_khz(b_khz, tau_us); }
    MeasurementModel measurement(double navg) const { return {sigma0, r, navg}; }
};

/// Validation failure listing every problem found.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Non-zero exit for an empty intersection.
class EmptyIntersection : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

io::Json config_to_json(const PipelineConfig& c);
/// Unknown keys and bad values are reported together as a ValidationError.
PipelineConfig config_from_json(const io::Json& j);

/// Checks every field; returns warnings (non-fatal), throws ValidationError.
/// Folds alpha -> min(alpha, 1 - alpha) and deduplicates, with a warning.
std::vector<std::string> validate_and_normalize(PipelineConfig& c);

/// Hash of the numerical content (output settings excluded).
std::string config_hash(const PipelineConfig& c);

/// T2(echo) / T2*(FID) from the exact curves' 1/e times.
double coherence_time_ratio(const NoiseParams& params);

/// Time grid for one alpha under the policy; default_decay applies when the
/// policy leaves it unset, default_reference likewise.
std::vector<double> resolve_time_grid(const PipelineConfig& c, double alpha, double default_decay,
                                      std::optional<double> default_reference);

GridSpec resolve_scan_grid(const PipelineConfig& c);

struct CommandReport {
    int exit_code = 0;
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
    io::Json summary;
};

// Each command validates the config, writes into c.output_dir and returns a
// report. ValidationError and NumericError propagate to the caller.
CommandReport cmd_curve(PipelineConfig c);
CommandReport cmd_scan(PipelineConfig c);
CommandReport cmd_intersect(PipelineConfig c);
CommandReport cmd_slownoise(PipelineConfig c);

// Lower-level pieces shared with tests.

struct IntersectionRun {
    std::vector<RegionMap> regions;  // one per alpha, in config order
    RegionMap combined;
    RegionMap echo;                  // alpha = 0.5 region on the same grid
};

/// Simulate + scan every alpha for one (seed, n_avg) and intersect.
IntersectionRun run_intersection(const PipelineConfig& c, std::uint64_t seed, double n_avg);

struct Improvement {
    double b = 0.0;    // echo half-width / combined half-width
    double tau = 0.0;
    double combined = 0.0;  // geometric mean of the two
};

Improvement improvement_ratio(const RegionMap& echo, const RegionMap& combined);

}  // namespace hahn
