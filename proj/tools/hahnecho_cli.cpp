// hahnecho — simulate asymmetric Hahn-echo coherence data and extract
// spin-bath parameters.
//
//   hahnecho curve|scan|intersect|slownoise [--config cfg.json] [overrides]
//   hahnecho config            print the default configuration
//
// Exit codes: 0 success, 1 I/O error, 2 invalid configuration, 3 numerical
// failure, 4 empty intersection.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "hahn/pipeline.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct Overrides {
    std::optional<double> b_khz, tau_us;
    std::optional<std::string> kind;
    std::vector<double> alphas;
    std::optional<std::size_t> n_points;
    std::optional<double> decay_exponent, reference_alpha, t_max_us;
    std::optional<double> sigma0, r;
    std::vector<double> n_avg;
    std::optional<double> guess_b_khz, guess_tau_us, grid_lo, grid_hi, delta;
    std::optional<std::size_t> n_b, n_tau;
    std::optional<unsigned> threads;
    std::optional<double> fit_lo, fit_hi;
    std::vector<std::uint64_t> seeds;
    std::optional<std::string> output_dir;
    bool no_csv = false;
    bool no_json = false;
};

void add_override_flags(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--b-khz", o.b_khz, "Coupling strength b [kHz]");
    cmd.add_option("--tau-us", o.tau_us, "Bath correlation time tau_c [us]");
    cmd.add_option("--kind", o.kind, "Correlation kind: exponential | gaussian");
    cmd.add_option("--alpha", o.alphas, "Pulse fraction(s) alpha");
    cmd.add_option("--n-points", o.n_points, "Points per curve");
    cmd.add_option("--decay-exponent", o.decay_exponent, "Window ends where W = exp(-value)");
    cmd.add_option("--reference-alpha", o.reference_alpha, "Shared window from this alpha's curve");
    cmd.add_option("--t-max-us", o.t_max_us, "Explicit window end [us]");
    cmd.add_option("--sigma0", o.sigma0, "Per-average relative noise");
    cmd.add_option("--floor", o.r, "Noise-floor fraction r");
    cmd.add_option("--n-avg", o.n_avg, "Number(s) of averages");
    cmd.add_option("--guess-b-khz", o.guess_b_khz, "Scan grid center b [kHz]");
    cmd.add_option("--guess-tau-us", o.guess_tau_us, "Scan grid center tau_c [us]");
    cmd.add_option("--grid-lo", o.grid_lo, "Scan grid lower factor");
    cmd.add_option("--grid-hi", o.grid_hi, "Scan grid upper factor");
    cmd.add_option("--n-b", o.n_b, "Scan grid size along b");
    cmd.add_option("--n-tau", o.n_tau, "Scan grid size along tau_c");
    cmd.add_option("--delta", o.delta, "Acceptance offset on reduced chi^2");
    cmd.add_option("--threads", o.threads, "Scan threads (0 = hardware)");
    cmd.add_option("--fit-lo", o.fit_lo, "Fit bounds lower factor");
    cmd.add_option("--fit-hi", o.fit_hi, "Fit bounds upper factor");
    cmd.add_option("--seed", o.seeds, "Seed(s)");
    cmd.add_option("-o,--output", o.output_dir, "Output directory (env HAHNECHO_OUTPUT_DIR)");
    cmd.add_flag("--no-csv", o.no_csv, "Skip CSV files");
    cmd.add_flag("--no-json", o.no_json, "Skip JSON files");
}

void apply(const Overrides& o, hahn::PipelineConfig& c) {
    if (o.b_khz) c.b_khz = *o.b_khz;
    if (o.tau_us) c.tau_us = *o.tau_us;
    if (o.kind) c.kind = hahn::correlation_kind_from_string(*o.kind);
    if (!o.alphas.empty()) c.alphas = o.alphas;
    if (o.n_points) c.grid.n_points = *o.n_points;
    if (o.decay_exponent) c.grid.decay_exponent = o.decay_exponent;
    if (o.reference_alpha) c.grid.reference_alpha = o.reference_alpha;
    if (o.t_max_us) c.grid.t_max_us = o.t_max_us;
    if (o.sigma0) c.sigma0 = *o.sigma0;
    if (o.r) c.r = *o.r;
    if (!o.n_avg.empty()) c.n_avg = o.n_avg;
    if (o.guess_b_khz) c.scan.guess_b_khz = o.guess_b_khz;
    if (o.guess_tau_us) c.scan.guess_tau_us = o.guess_tau_us;
    if (o.grid_lo) c.scan.lo_factor = *o.grid_lo;
    if (o.grid_hi) c.scan.hi_factor = *o.grid_hi;
    if (o.n_b) c.scan.n_b = *o.n_b;
    if (o.n_tau) c.scan.n_tau = *o.n_tau;
    if (o.delta) c.scan.delta = *o.delta;
    if (o.threads) c.scan.threads = *o.threads;
    if (o.fit_lo) c.fit.lo_factor = *o.fit_lo;
    if (o.fit_hi) c.fit.hi_factor = *o.fit_hi;
    if (!o.seeds.empty()) c.seeds = o.seeds;
    if (const char* env = std::getenv("HAHNECHO_OUTPUT_DIR"); env && *env) c.output_dir = env;
    if (o.output_dir) c.output_dir = *o.output_dir;
    if (o.no_csv) c.write_csv = false;
    if (o.no_json) c.write_json = false;
}

hahn::PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw hahn::ValidationError({"cannot read config file '" + path + "'"});
    hahn::io::Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw hahn::ValidationError({std::string("config is not valid JSON: ") + e.what()});
    }
    return hahn::config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymmetric Hahn-echo spin-bath characterization"};
    app.require_subcommand(1);
    std::string config_path;
    Overrides overrides;

    CLI::App* curve = app.add_subcommand("curve", "Exact curves and stretched-exponential fits");
    CLI::App* scan = app.add_subcommand("scan", "Simulate curves and scan chi^2 regions");
    CLI::App* intersect = app.add_subcommand("intersect", "Intersect regions across alphas");
    CLI::App* slownoise = app.add_subcommand("slownoise", "Slow-noise vs explicit extraction");
    CLI::App* config = app.add_subcommand("config", "Print the resolved configuration");
    for (CLI::App* cmd : {curve, scan, intersect, slownoise, config}) {
        cmd->add_option("-c,--config", config_path, "JSON configuration file");
        add_override_flags(*cmd, overrides);
    }
    CLI11_PARSE(app, argc, argv);

    try {
        hahn::PipelineConfig cfg = load_config(config_path);
        apply(overrides, cfg);
        if (config->parsed()) {
            std::cout << hahn::config_to_json(cfg).dump(2) << '\n';
            return 0;
        }
        hahn::CommandReport report;
        if (curve->parsed()) report = hahn::cmd_curve(cfg);
        if (scan->parsed()) report = hahn::cmd_scan(cfg);
        if (intersect->parsed()) report = hahn::cmd_intersect(cfg);
        if (slownoise->parsed()) report = hahn::cmd_slownoise(cfg);
        for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& f : report.files) std::cerr << "wrote " << f.string() << '\n';
        std::cout << report.summary.dump(2) << '\n';
        if (report.exit_code == 4) std::cerr << "error: empty intersection\n";
        return report.exit_code;
    } catch (const hahn::ValidationError& e) {
        for (const auto& p : e.problems()) std::cerr << "config error: " << p << '\n';
        return kExitValidation;
    } catch (const hahn::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const hahn::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    }
}
