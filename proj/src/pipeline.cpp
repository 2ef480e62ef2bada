#include "hahn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "hahn/coherence.hpp"
#include "hahn/estimation.hpp"

namespace hahn {
namespace fs = std::filesystem;
using io::Json;

namespace {

constexpr double kSlowNoiseDecayExponent = kDefaultDecayExponent;

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

std::string alpha_tag(double alpha) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", alpha);
    return buf;
}

std::string navg_tag(double n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", n);
    return buf;
}

// Noise stream per alpha, independent of which other alphas are configured.
std::uint64_t alpha_stream(double alpha) { return static_cast<std::uint64_t>(std::llround(alpha * 1e9)); }

template <class T>
std::string list_string(const std::vector<T>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v[i];
    return os.str();
}

class OutputSink {
public:
    OutputSink(const PipelineConfig& c, CommandReport& report)
        : dir_(c.output_dir), csv_(c.write_csv), json_(c.write_json), report_(report) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) {
            throw std::ios_base::failure("cannot create output directory '" + dir_.string() + "'");
        }
    }

    bool csv() const { return csv_; }
    bool json() const { return json_; }

    template <class Writer>
    void write(const std::string& name, Writer&& writer) {
        const fs::path path = dir_ / name;
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
        writer(os);
        os.flush();
        if (!os) throw std::ios_base::failure("write failed for '" + path.string() + "'");
        report_.files.push_back(path);
    }

    void write_json(const std::string& name, const Json& j) {
        write(name, [&](std::ostream& os) { os << j.dump(1) << '\n'; });
    }

private:
    fs::path dir_;
    bool csv_;
    bool json_;
    CommandReport& report_;
};

io::Provenance provenance(const PipelineConfig& c, const std::string& seeds) {
    return {{"config_hash", config_hash(c)}, {"seeds", seeds}};
}

void feasibility_guard(const PipelineConfig& c, std::vector<std::string>& warnings) {
    const double ratio = coherence_time_ratio(c.noise());
    if (ratio >= 100.0) {
        std::ostringstream msg;
        msg << "T2(echo)/T2* = " << ratio
            << " >= 100: pulse placement at alpha*T needs sub-2 ns timing for these parameters";
        warnings.push_back(msg.str());
    }
}

CommandReport prepare(PipelineConfig& c) {
    CommandReport report;
    report.warnings = validate_and_normalize(c);
    feasibility_guard(c, report.warnings);
    return report;
}

Json estimate_or_null(const RegionMap& r) { return io::estimate_to_json(r); }

CoherenceCurve simulate_for(const PipelineConfig& c, double alpha, std::uint64_t seed, double n_avg,
                            std::vector<std::string>& warnings) {
    SequenceSpec seq{alpha, resolve_time_grid(c, alpha, kScanDecayExponent, kScanReferenceAlpha)};
    CoherenceCurve curve = simulate_curve(seq, c.noise(), c.measurement(n_avg), seed, alpha_stream(alpha), c.kind);
    if (effective_sigma(c.measurement(n_avg)) == 0.0) {
        std::fill(curve.sigmas.begin(), curve.sigmas.end(), 1.0);
        warnings.push_back("noiseless measurement model: chi2 uses unit sigma");
    }
    return curve;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration: " + join(problems, "; ")),
      problems_(std::move(problems)) {}

Json config_to_json(const PipelineConfig& c) {
    const auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    return Json{
        {"schema_version", kConfigSchemaVersion},
        {"noise", {{"b_kHz", c.b_khz}, {"tau_c_us", c.tau_us}, {"kind", to_string(c.kind)}}},
        {"sequence",
         {{"alphas", c.alphas},
          {"n_points", c.grid.n_points},
          {"decay_exponent", opt(c.grid.decay_exponent)},
          {"reference_alpha", opt(c.grid.reference_alpha)},
          {"t_max_us", opt(c.grid.t_max_us)}}},
        {"measurement", {{"sigma0", c.sigma0}, {"r", c.r}, {"n_avg", c.n_avg}}},
        {"scan",
         {{"guess_b_kHz", opt(c.scan.guess_b_khz)},
          {"guess_tau_c_us", opt(c.scan.guess_tau_us)},
          {"lo_factor", c.scan.lo_factor},
          {"hi_factor", c.scan.hi_factor},
          {"n_b", c.scan.n_b},
          {"n_tau", c.scan.n_tau},
          {"delta", c.scan.delta},
          {"threads", c.scan.threads}}},
        {"fit", {{"lo_factor", c.fit.lo_factor}, {"hi_factor", c.fit.hi_factor}}},
        {"seeds", c.seeds},
        {"output", {{"directory", c.output_dir}, {"csv", c.write_csv}, {"json", c.write_json}}},
    };
}

PipelineConfig config_from_json(const Json& j) {
    PipelineConfig c;
    std::vector<std::string> problems;
    if (!j.is_object()) throw ValidationError({"config must be a JSON object"});

    const auto check_keys = [&](const Json& obj, const std::string& where, std::set<std::string> allowed) {
        for (const auto& [key, _] : obj.items()) {
            if (!allowed.count(key)) problems.push_back("unknown key '" + where + key + "'");
        }
    };
    const auto section = [&](const char* name) -> const Json* {
        if (!j.contains(name)) return nullptr;
        if (!j.at(name).is_object()) {
            problems.push_back(std::string("'") + name + "' must be an object");
            return nullptr;
        }
        return &j.at(name);
    };
    const auto read = [&](const Json* obj, const std::string& where, const char* key, auto& out) {
        if (!obj || !obj->contains(key)) return;
        try {
            out = obj->at(key).get<std::decay_t<decltype(out)>>();
        } catch (const std::exception&) {
            problems.push_back("bad type for '" + where + key + "'");
        }
    };
    const auto read_opt = [&](const Json* obj, const std::string& where, const char* key,
                              std::optional<double>& out) {
        if (!obj || !obj->contains(key)) return;
        if (obj->at(key).is_null()) {
            out.reset();
        } else if (obj->at(key).is_number()) {
            out = obj->at(key).get<double>();
        } else {
            problems.push_back("bad type for '" + where + key + "'");
        }
    };

    check_keys(j, "", {"schema_version", "noise", "sequence", "measurement", "scan", "fit", "seeds", "output"});
    if (j.contains("schema_version")) {
        if (!j.at("schema_version").is_number_integer() ||
            j.at("schema_version").get<int>() != kConfigSchemaVersion) {
            problems.push_back("unsupported schema_version (expected " + std::to_string(kConfigSchemaVersion) + ")");
        }
    }

    if (const Json* s = section("noise")) {
        check_keys(*s, "noise.", {"b_kHz", "tau_c_us", "kind"});
        read(s, "noise.", "b_kHz", c.b_khz);
        read(s, "noise.", "tau_c_us", c.tau_us);
        std::string kind = to_string(c.kind);
        read(s, "noise.", "kind", kind);
        try {
            c.kind = correlation_kind_from_string(kind);
        } catch (const DomainError& e) {
            problems.push_back(e.what());
        }
    }
    if (const Json* s = section("sequence")) {
        check_keys(*s, "sequence.", {"alphas", "n_points", "decay_exponent", "reference_alpha", "t_max_us"});
        read(s, "sequence.", "alphas", c.alphas);
        read(s, "sequence.", "n_points", c.grid.n_points);
        read_opt(s, "sequence.", "decay_exponent", c.grid.decay_exponent);
        read_opt(s, "sequence.", "reference_alpha", c.grid.reference_alpha);
        read_opt(s, "sequence.", "t_max_us", c.grid.t_max_us);
    }
    if (const Json* s = section("measurement")) {
        check_keys(*s, "measurement.", {"sigma0", "r", "n_avg"});
        read(s, "measurement.", "sigma0", c.sigma0);
        read(s, "measurement.", "r", c.r);
        if (s->contains("n_avg") && s->at("n_avg").is_number()) {
            c.n_avg = {s->at("n_avg").get<double>()};
        } else {
            read(s, "measurement.", "n_avg", c.n_avg);
        }
    }
    if (const Json* s = section("scan")) {
        check_keys(*s, "scan.", {"guess_b_kHz", "guess_tau_c_us", "lo_factor", "hi_factor", "n_b", "n_tau", "delta", "threads"});
        read_opt(s, "scan.", "guess_b_kHz", c.scan.guess_b_khz);
        read_opt(s, "scan.", "guess_tau_c_us", c.scan.guess_tau_us);
        read(s, "scan.", "lo_factor", c.scan.lo_factor);
        read(s, "scan.", "hi_factor", c.scan.hi_factor);
        read(s, "scan.", "n_b", c.scan.n_b);
        read(s, "scan.", "n_tau", c.scan.n_tau);
        read(s, "scan.", "delta", c.scan.delta);
        read(s, "scan.", "threads", c.scan.threads);
    }
    if (const Json* s = section("fit")) {
        check_keys(*s, "fit.", {"lo_factor", "hi_factor"});
        read(s, "fit.", "lo_factor", c.fit.lo_factor);
        read(s, "fit.", "hi_factor", c.fit.hi_factor);
    }
    if (j.contains("seeds")) read(&j, "", "seeds", c.seeds);
    if (const Json* s = section("output")) {
        check_keys(*s, "output.", {"directory", "csv", "json"});
        read(s, "output.", "directory", c.output_dir);
        read(s, "output.", "csv", c.write_csv);
        read(s, "output.", "json", c.write_json);
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return c;
}

std::vector<std::string> validate_and_normalize(PipelineConfig& c) {
    std::vector<std::string> problems;
    std::vector<std::string> warnings;
    const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };

    if (!positive(c.b_khz)) problems.push_back("noise.b_kHz must be > 0");
    if (!positive(c.tau_us)) problems.push_back("noise.tau_c_us must be > 0");

    if (c.alphas.empty()) problems.push_back("sequence.alphas must not be empty");
    std::vector<double> folded;
    for (double a : c.alphas) {
        if (!(a >= 0.0 && a <= 1.0)) {
            problems.push_back("sequence.alphas: " + io::format_number(a) + " outside [0, 1]");
            continue;
        }
        double f = a;
        if (a > 0.5) {
            f = 1.0 - a;
            warnings.push_back("alpha " + io::format_number(a) + " folded to " + io::format_number(f) +
                               " (W(alpha) = W(1 - alpha))");
        }
        const bool seen = std::any_of(folded.begin(), folded.end(),
                                      [&](double g) { return std::abs(g - f) < 1e-12; });
        if (seen) {
            warnings.push_back("duplicate alpha " + io::format_number(f) + " dropped");
        } else {
            folded.push_back(f);
        }
    }
    c.alphas = folded;

    if (c.grid.n_points < 10) problems.push_back("sequence.n_points must be >= 10");
    if (c.grid.decay_exponent && !positive(*c.grid.decay_exponent)) {
        problems.push_back("sequence.decay_exponent must be > 0");
    }
    if (c.grid.reference_alpha && !(*c.grid.reference_alpha >= 0.0 && *c.grid.reference_alpha <= 1.0)) {
        problems.push_back("sequence.reference_alpha must lie in [0, 1]");
    }
    if (c.grid.t_max_us && !positive(*c.grid.t_max_us)) problems.push_back("sequence.t_max_us must be > 0");

    if (!(std::isfinite(c.sigma0) && c.sigma0 >= 0.0)) problems.push_back("measurement.sigma0 must be >= 0");
    if (!(std::isfinite(c.r) && c.r >= 0.0)) problems.push_back("measurement.r must be >= 0");
    if (c.n_avg.empty()) problems.push_back("measurement.n_avg must not be empty");
    for (double n : c.n_avg) {
        if (!(std::isfinite(n) && n >= 1.0 && n == std::floor(n))) {
            problems.push_back("measurement.n_avg: " + io::format_number(n) + " is not an integer >= 1");
        }
    }

    if (c.scan.guess_b_khz && !positive(*c.scan.guess_b_khz)) problems.push_back("scan.guess_b_kHz must be > 0");
    if (c.scan.guess_tau_us && !positive(*c.scan.guess_tau_us)) {
        problems.push_back("scan.guess_tau_c_us must be > 0");
    }
    if (!(positive(c.scan.lo_factor) && c.scan.hi_factor > c.scan.lo_factor && std::isfinite(c.scan.hi_factor))) {
        problems.push_back("scan: need 0 < lo_factor < hi_factor");
    }
    if (c.scan.n_b < 2 || c.scan.n_tau < 2) problems.push_back("scan: n_b and n_tau must be >= 2");
    if (!positive(c.scan.delta)) problems.push_back("scan.delta must be > 0");

    if (!(positive(c.fit.lo_factor) && c.fit.lo_factor <= 1.0 && c.fit.hi_factor >= 1.0 &&
          std::isfinite(c.fit.hi_factor))) {
        problems.push_back("fit: need 0 < lo_factor <= 1 <= hi_factor");
    }
    if (c.seeds.empty()) problems.push_back("seeds must not be empty");
    if (c.output_dir.empty()) problems.push_back("output.directory must not be empty");

    if (!problems.empty()) throw ValidationError(std::move(problems));
    if (c.kind != CorrelationKind::Exponential) {
        warnings.push_back("gaussian correlation: data are simulated with the gaussian kernel but "
                           "fits and scans use the exponential closed form");
    }
    return warnings;
}

std::string config_hash(const PipelineConfig& c) {
    Json j = config_to_json(c);
    j.erase("output");
    j["scan"].erase("threads");
    return io::fnv1a_hex(j.dump());
}

double coherence_time_ratio(const NoiseParams& params) {
    return decay_time(0.5, params, 1.0) / decay_time(0.0, params, 1.0);
}

std::vector<double> resolve_time_grid(const PipelineConfig& c, double alpha, double default_decay,
                                      std::optional<double> default_reference) {
    if (c.grid.t_max_us) return linear_time_grid(*c.grid.t_max_us, c.grid.n_points);
    const double decay = c.grid.decay_exponent.value_or(default_decay);
    const std::optional<double> ref = c.grid.reference_alpha ? c.grid.reference_alpha : default_reference;
    return build_time_grid(c.noise(), ref.value_or(alpha), c.grid.n_points, decay);
}

GridSpec resolve_scan_grid(const PipelineConfig& c) {
    const NoiseParams guess = NoiseParams::from_khz(c.scan.guess_b_khz.value_or(c.b_khz),
                                                    c.scan.guess_tau_us.value_or(c.tau_us));
    GridSpec g = GridSpec::around(guess, c.scan.lo_factor, c.scan.hi_factor);
    g.n_b = c.scan.n_b;
    g.n_tau = c.scan.n_tau;
    return g;
}

CommandReport cmd_curve(PipelineConfig c) {
    CommandReport report = prepare(c);
    OutputSink sink(c, report);
    const io::Provenance prov = provenance(c, "none");
    const NoiseParams params = c.noise();

    Json summary = Json::array();
    for (double alpha : c.alphas) {
        SequenceSpec seq{alpha, resolve_time_grid(c, alpha, kDefaultDecayExponent, std::nullopt)};
        const MeasurementModel exact_model{0.0, 0.0, 1.0};
        const CoherenceCurve curve = simulate_curve(seq, params, exact_model, 0, 0, c.kind);
        const SlowNoiseFit fit = fit_stretched_exponential(curve);

        const std::string tag = "curve_alpha" + alpha_tag(alpha);
        if (sink.csv()) {
            sink.write(tag + ".csv", [&](std::ostream& os) {
                for (const auto& [k, v] : prov) os << "# " << k << '=' << v << '\n';
                os << "# stretched_t_char_us=" << io::format_number(fit.t_char)
                   << " stretched_p=" << io::format_number(fit.p) << '\n';
                os << "T_us,W,sigma,W_stretched,residual\n";
                for (std::size_t i = 0; i < curve.size(); ++i) {
                    const double s = std::exp(-std::pow(curve.times[i] / fit.t_char, fit.p));
                    os << io::format_number(curve.times[i]) << ',' << io::format_number(curve.values[i]) << ','
                       << io::format_number(curve.sigmas[i]) << ',' << io::format_number(s) << ','
                       << io::format_number(curve.values[i] - s) << '\n';
                }
            });
        }
        Json entry{{"alpha", alpha},
                   {"t_char_us", fit.t_char},
                   {"p", fit.p},
                   {"sigma_t_us", fit.sigma_t},
                   {"sigma_p", fit.sigma_p}};
        if (sink.json()) {
            Json j = io::curve_to_json(curve);
            j["config_hash"] = config_hash(c);
            j["stretched_fit"] = entry;
            sink.write_json(tag + ".json", j);
        }
        summary.push_back(entry);
    }
    report.summary = Json{{"command", "curve"}, {"config_hash", config_hash(c)}, {"curves", summary}};
    return report;
}

CommandReport cmd_scan(PipelineConfig c) {
    CommandReport report = prepare(c);
    OutputSink sink(c, report);
    const GridSpec grid = resolve_scan_grid(c);
    const NoiseParams truth = c.noise();
    const std::string hash = config_hash(c);

    Json rows = Json::array();
    std::ostringstream table;
    table << "alpha,seed,n_avg,sigma_eff,accepted_cells,area,b_kHz,b_half_kHz,tau_c_us,tau_c_half_us,"
             "chi2nu_min,min_on_boundary,empty,contains_true\n";
    for (double alpha : c.alphas) {
        for (std::uint64_t seed : c.seeds) {
            for (double n_avg : c.n_avg) {
                const CoherenceCurve curve = simulate_for(c, alpha, seed, n_avg, report.warnings);
                const RegionMap region = scan_region(curve, grid, c.scan.delta, c.scan.threads);
                const std::string tag =
                    "scan_alpha" + alpha_tag(alpha) + "_seed" + std::to_string(seed) + "_navg" + navg_tag(n_avg);
                const io::Provenance prov = provenance(c, std::to_string(seed));
                if (sink.csv()) {
                    sink.write(tag + "_curve.csv", [&](std::ostream& os) { io::write_curve_csv(os, curve, prov); });
                    sink.write(tag + "_map.csv", [&](std::ostream& os) { io::write_region_csv(os, region, prov); });
                }
                if (sink.json()) {
                    Json j = io::region_to_json(region);
                    j["config_hash"] = hash;
                    j["seed"] = seed;
                    j["alpha"] = alpha;
                    j["n_avg"] = n_avg;
                    j["curve"] = io::curve_to_json(curve);
                    sink.write_json(tag + ".json", j);
                }
                if (region.min_on_boundary) {
                    report.warnings.push_back(tag + ": chi2nu minimum on the grid boundary");
                }
                const auto e = region.estimate.value_or(RegionEstimate{});
                const double sigma = effective_sigma(c.measurement(n_avg));
                table << io::format_number(alpha) << ',' << seed << ',' << navg_tag(n_avg) << ','
                      << io::format_number(sigma) << ',' << region.accepted_count() << ','
                      << io::format_number(region.area() / kKhzToPerUs) << ','
                      << io::format_number(e.b_center / kKhzToPerUs) << ','
                      << io::format_number(e.b_half / kKhzToPerUs) << ',' << io::format_number(e.tau_center) << ','
                      << io::format_number(e.tau_half) << ',' << io::format_number(region.chi2nu_min) << ','
                      << region.min_on_boundary << ',' << region.empty() << ',' << region.contains(truth) << '\n';
                rows.push_back(Json{{"alpha", alpha},
                                    {"seed", seed},
                                    {"n_avg", n_avg},
                                    {"sigma_eff", sigma},
                                    {"accepted_cells", region.accepted_count()},
                                    {"estimate", estimate_or_null(region)},
                                    {"chi2nu_min", region.chi2nu_min},
                                    {"min_on_boundary", region.min_on_boundary},
                                    {"contains_true", region.contains(truth)}});
            }
        }
    }
    if (sink.csv()) {
        sink.write("scan_summary.csv", [&](std::ostream& os) {
            os << "# config_hash=" << hash << "\n# seeds=" << list_string(c.seeds) << '\n' << table.str();
        });
    }
    report.summary = Json{{"command", "scan"}, {"config_hash", hash}, {"seeds", c.seeds}, {"rows", rows}};
    if (sink.json()) sink.write_json("scan_summary.json", report.summary);
    return report;
}

IntersectionRun run_intersection(const PipelineConfig& c, std::uint64_t seed, double n_avg) {
    const GridSpec grid = resolve_scan_grid(c);
    std::vector<std::string> ignored;
    IntersectionRun run;
    std::optional<std::size_t> echo_index;
    for (std::size_t k = 0; k < c.alphas.size(); ++k) {
        const CoherenceCurve curve = simulate_for(c, c.alphas[k], seed, n_avg, ignored);
        run.regions.push_back(scan_region(curve, grid, c.scan.delta, c.scan.threads));
        if (c.alphas[k] == 0.5) echo_index = k;
    }
    run.combined = intersect_regions(run.regions);
    if (echo_index) {
        run.echo = run.regions[*echo_index];
    } else {
        const CoherenceCurve echo = simulate_for(c, 0.5, seed, n_avg, ignored);
        run.echo = scan_region(echo, grid, c.scan.delta, c.scan.threads);
    }
    return run;
}

Improvement improvement_ratio(const RegionMap& echo, const RegionMap& combined) {
    Improvement out;
    if (!echo.estimate || !combined.estimate) return {std::nan(""), std::nan(""), std::nan("")};
    // A single accepted cell has zero extent; count it as half a cell.
    const auto half = [](double h, const std::vector<double>& g) {
        const double cell = (g.back() - g.front()) / static_cast<double>(g.size() - 1);
        return std::max(h, 0.5 * cell);
    };
    out.b = half(echo.estimate->b_half, echo.b_grid) / half(combined.estimate->b_half, combined.b_grid);
    out.tau = half(echo.estimate->tau_half, echo.tau_grid) / half(combined.estimate->tau_half, combined.tau_grid);
    out.combined = std::sqrt(out.b * out.tau);
    return out;
}

CommandReport cmd_intersect(PipelineConfig c) {
    CommandReport report = prepare(c);
    OutputSink sink(c, report);
    const std::string hash = config_hash(c);
    const NoiseParams truth = c.noise();

    Json rows = Json::array();
    std::ostringstream table;
    table << "seed,n_avg,accepted_cells,b_kHz,b_half_kHz,tau_c_us,tau_c_half_us,echo_b_half_kHz,"
             "echo_tau_c_half_us,ratio_b,ratio_tau,ratio,contains_true,empty\n";
    std::vector<double> ratios;
    bool any_empty = false;
    for (std::uint64_t seed : c.seeds) {
        for (double n_avg : c.n_avg) {
            const IntersectionRun run = run_intersection(c, seed, n_avg);
            const std::string tag = "intersect_seed" + std::to_string(seed) + "_navg" + navg_tag(n_avg);
            const io::Provenance prov = provenance(c, std::to_string(seed));
            if (sink.json()) {
                for (std::size_t k = 0; k < c.alphas.size(); ++k) {
                    Json j = io::region_to_json(run.regions[k]);
                    j["config_hash"] = hash;
                    j["seed"] = seed;
                    j["alpha"] = c.alphas[k];
                    j["n_avg"] = n_avg;
                    sink.write_json(tag + "_alpha" + alpha_tag(c.alphas[k]) + ".json", j);
                }
                Json j = io::region_to_json(run.combined);
                j["config_hash"] = hash;
                j["seed"] = seed;
                j["alphas"] = c.alphas;
                j["n_avg"] = n_avg;
                j["echo_estimate"] = estimate_or_null(run.echo);
                sink.write_json(tag + ".json", j);
            }
            if (sink.csv()) {
                sink.write(tag + "_map.csv", [&](std::ostream& os) { io::write_region_csv(os, run.combined, prov); });
            }
            const Improvement imp = improvement_ratio(run.echo, run.combined);
            if (run.combined.empty()) {
                any_empty = true;
                report.warnings.push_back(tag + ": empty intersection");
            } else {
                ratios.push_back(imp.combined);
            }
            const auto e = run.combined.estimate.value_or(RegionEstimate{});
            const auto ee = run.echo.estimate.value_or(RegionEstimate{});
            table << seed << ',' << navg_tag(n_avg) << ',' << run.combined.accepted_count() << ','
                  << io::format_number(e.b_center / kKhzToPerUs) << ',' << io::format_number(e.b_half / kKhzToPerUs)
                  << ',' << io::format_number(e.tau_center) << ',' << io::format_number(e.tau_half) << ','
                  << io::format_number(ee.b_half / kKhzToPerUs) << ',' << io::format_number(ee.tau_half) << ','
                  << io::format_number(imp.b) << ',' << io::format_number(imp.tau) << ','
                  << io::format_number(imp.combined) << ',' << run.combined.contains(truth) << ','
                  << run.combined.empty() << '\n';
            rows.push_back(Json{{"seed", seed},
                                {"n_avg", n_avg},
                                {"estimate", estimate_or_null(run.combined)},
                                {"echo_estimate", estimate_or_null(run.echo)},
                                {"ratio_b", imp.b},
                                {"ratio_tau", imp.tau},
                                {"ratio", imp.combined},
                                {"contains_true", run.combined.contains(truth)},
                                {"empty", run.combined.empty()}});
        }
    }
    const double median_ratio = median(ratios);
    if (sink.csv()) {
        sink.write("intersect_summary.csv", [&](std::ostream& os) {
            os << "# config_hash=" << hash << "\n# seeds=" << list_string(c.seeds)
               << "\n# alphas=" << list_string(c.alphas) << "\n# median_ratio=" << io::format_number(median_ratio)
               << '\n'
               << table.str();
        });
    }
    report.summary = Json{{"command", "intersect"},
                          {"config_hash", hash},
                          {"alphas", c.alphas},
                          {"seeds", c.seeds},
                          {"median_improvement_ratio", std::isfinite(median_ratio) ? Json(median_ratio) : Json(nullptr)},
                          {"rows", rows}};
    if (sink.json()) sink.write_json("intersect_summary.json", report.summary);
    if (any_empty) report.exit_code = 4;
    return report;
}

CommandReport cmd_slownoise(PipelineConfig c) {
    CommandReport report = prepare(c);
    OutputSink sink(c, report);
    const std::string hash = config_hash(c);
    const NoiseParams truth = c.noise();
    const MeasurementModel exact_model{0.0, 0.0, 1.0};

    const auto exact_curve = [&](double alpha) {
        SequenceSpec seq{alpha, resolve_time_grid(c, alpha, kSlowNoiseDecayExponent, std::nullopt)};
        return simulate_curve(seq, truth, exact_model, 0, 0, c.kind);
    };
    const CoherenceCurve echo = exact_curve(0.5);
    const CoherenceCurve fid = exact_curve(0.0);
    const SlowNoiseFit echo_fit = fit_stretched_exponential(echo);
    const SlowNoiseFit fid_fit = fit_stretched_exponential(fid);
    const SlowNoiseEstimate slow = slow_noise_params(echo_fit, fid_fit);

    // The explicit fits start from the slow-noise answer.
    const FitBounds bounds = FitBounds::around(slow.params, c.fit.lo_factor, c.fit.hi_factor);
    const FitResult echo_explicit = fit_closed_form(echo, slow.params, bounds);
    const FitResult fid_explicit = fit_closed_form(fid, slow.params, bounds);

    struct Row {
        const char* method;
        NoiseParams p;
        double sb, st;
    };
    const std::vector<Row> table{
        {"true", truth, 0.0, 0.0},
        {"slow_noise", slow.params, slow.sigma_b, slow.sigma_tau},
        {"explicit_echo", echo_explicit.params, echo_explicit.sigma_b, echo_explicit.sigma_tau},
        {"explicit_fid", fid_explicit.params, fid_explicit.sigma_b, fid_explicit.sigma_tau},
    };

    Json rows = Json::array();
    for (const Row& r : table) {
        rows.push_back(Json{{"method", r.method},
                            {"b_kHz", r.p.b_khz()},
                            {"sigma_b_kHz", r.sb / kKhzToPerUs},
                            {"tau_c_us", r.p.tau_c},
                            {"sigma_tau_c_us", r.st}});
    }
    const auto fit_json = [](const SlowNoiseFit& f) {
        return Json{{"t_char_us", f.t_char}, {"p", f.p}, {"sigma_t_us", f.sigma_t}, {"sigma_p", f.sigma_p}};
    };
    if (sink.csv()) {
        sink.write("slownoise_table.csv", [&](std::ostream& os) {
            os << "# config_hash=" << hash << "\n# seeds=none\n";
            os << "# T2_us=" << io::format_number(echo_fit.t_char) << " p_echo=" << io::format_number(echo_fit.p)
               << " T2star_us=" << io::format_number(fid_fit.t_char) << " p_fid=" << io::format_number(fid_fit.p)
               << '\n';
            os << "method,b_kHz,sigma_b_kHz,tau_c_us,sigma_tau_c_us\n";
            for (const Row& r : table) {
                os << r.method << ',' << io::format_number(r.p.b_khz()) << ','
                   << io::format_number(r.sb / kKhzToPerUs) << ',' << io::format_number(r.p.tau_c) << ','
                   << io::format_number(r.st) << '\n';
            }
        });
    }
    report.summary = Json{{"command", "slownoise"},
                          {"config_hash", hash},
                          {"echo_stretched", fit_json(echo_fit)},
                          {"fid_stretched", fit_json(fid_fit)},
                          {"rows", rows}};
    if (sink.json()) sink.write_json("slownoise.json", report.summary);
    return report;
}

}  // namespace hahn
