#include "hahn/io.hpp"

#include <cstdio>
#include <ostream>

namespace hahn::io {
namespace {

void write_provenance(std::ostream& os, const Provenance& prov) {
    for (const auto& [key, value] : prov) os << "# " << key << '=' << value << '\n';
}

Json model_to_json(const MeasurementModel& m) {
    return Json{{"sigma0", m.sigma0}, {"r", m.r}, {"n_avg", m.n_avg}};
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_curve_csv(std::ostream& os, const CoherenceCurve& curve, const Provenance& prov) {
    write_provenance(os, prov);
    os << "T_us,W,sigma\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        os << format_number(curve.times[i]) << ',' << format_number(curve.values[i]) << ','
           << format_number(curve.sigmas[i]) << '\n';
    }
}

Json curve_to_json(const CoherenceCurve& curve) {
    const auto& m = curve.meta;
    return Json{
        {"alpha", curve.alpha},
        {"T_us", curve.times},
        {"W", curve.values},
        {"sigma", curve.sigmas},
        {"provenance",
         {{"seed", m.seed},
          {"stream", m.stream},
          {"model", model_to_json(m.model)},
          {"params", {{"b_kHz", m.params.b_khz()}, {"tau_c_us", m.params.tau_c}}},
          {"kind", to_string(m.kind)}}},
    };
}

CoherenceCurve curve_from_json(const Json& j) {
    CoherenceCurve c;
    c.alpha = j.at("alpha").get<double>();
    c.times = j.at("T_us").get<std::vector<double>>();
    c.values = j.at("W").get<std::vector<double>>();
    c.sigmas = j.at("sigma").get<std::vector<double>>();
    if (j.contains("provenance")) {
        const Json& p = j.at("provenance");
        c.meta.seed = p.at("seed").get<std::uint64_t>();
        c.meta.stream = p.at("stream").get<std::uint64_t>();
        const Json& m = p.at("model");
        c.meta.model = MeasurementModel{m.at("sigma0").get<double>(), m.at("r").get<double>(),
                                        m.at("n_avg").get<double>()};
        c.meta.params = NoiseParams::from_khz(p.at("params").at("b_kHz").get<double>(),
                                              p.at("params").at("tau_c_us").get<double>());
        c.meta.kind = correlation_kind_from_string(p.at("kind").get<std::string>());
    }
    c.validate();
    return c;
}

Json encode_mask(const std::vector<std::uint8_t>& mask) {
    Json runs = Json::array();
    const std::uint8_t first = mask.empty() ? 0 : (mask.front() ? 1 : 0);
    std::uint8_t current = first;
    std::size_t run = 0;
    for (std::uint8_t v : mask) {
        const std::uint8_t bit = v ? 1 : 0;
        if (bit != current) {
            runs.push_back(run);
            current = bit;
            run = 0;
        }
        ++run;
    }
    if (run > 0) runs.push_back(run);
    return Json{{"first", first}, {"runs", runs}};
}

std::vector<std::uint8_t> decode_mask(const Json& j) {
    std::vector<std::uint8_t> mask;
    std::uint8_t current = j.at("first").get<std::uint8_t>() ? 1 : 0;
    for (const auto& run : j.at("runs")) {
        mask.insert(mask.end(), run.get<std::size_t>(), current);
        current ^= 1;
    }
    return mask;
}

void write_region_csv(std::ostream& os, const RegionMap& region, const Provenance& prov) {
    write_provenance(os, prov);
    os << "b_kHz,tau_c_us,chi2nu,accepted\n";
    for (std::size_t ib = 0; ib < region.n_b(); ++ib) {
        const std::string b = format_number(region.b_grid[ib] / kKhzToPerUs);
        for (std::size_t it = 0; it < region.n_tau(); ++it) {
            os << b << ',' << format_number(region.tau_grid[it]) << ','
               << format_number(region.chi2nu[region.index(ib, it)]) << ','
               << (region.accepted(ib, it) ? 1 : 0) << '\n';
        }
    }
}

Json estimate_to_json(const RegionMap& region) {
    if (!region.estimate) return nullptr;
    const RegionEstimate& e = *region.estimate;
    return Json{{"b_kHz", e.b_center / kKhzToPerUs},
                {"b_half_kHz", e.b_half / kKhzToPerUs},
                {"tau_c_us", e.tau_center},
                {"tau_c_half_us", e.tau_half}};
}

Json region_to_json(const RegionMap& region) {
    std::vector<double> b_khz(region.b_grid.size());
    for (std::size_t k = 0; k < b_khz.size(); ++k) b_khz[k] = region.b_grid[k] / kKhzToPerUs;
    Json j{
        {"b_grid_kHz", b_khz},
        {"tau_grid_us", region.tau_grid},
        {"chi2nu", region.chi2nu},
        {"threshold", region.threshold ? Json(*region.threshold) : Json(nullptr)},
        {"delta", region.delta},
        {"chi2nu_min", region.chi2nu_min},
        {"argmin", region.argmin},
        {"min_on_boundary", region.min_on_boundary},
        {"accepted_cells", region.accepted_count()},
        {"mask", encode_mask(region.mask)},
        {"estimate", estimate_to_json(region)},
    };
    return j;
}

RegionMap region_from_json(const Json& j) {
    RegionMap r;
    r.b_grid = j.at("b_grid_kHz").get<std::vector<double>>();
    for (double& b : r.b_grid) b *= kKhzToPerUs;
    r.tau_grid = j.at("tau_grid_us").get<std::vector<double>>();
    r.chi2nu = j.at("chi2nu").get<std::vector<double>>();
    if (!j.at("threshold").is_null()) r.threshold = j.at("threshold").get<double>();
    r.delta = j.at("delta").get<double>();
    r.chi2nu_min = j.at("chi2nu_min").get<double>();
    r.argmin = j.at("argmin").get<std::size_t>();
    r.min_on_boundary = j.at("min_on_boundary").get<bool>();
    r.mask = decode_mask(j.at("mask"));
    if (r.mask.size() != r.chi2nu.size() || r.chi2nu.size() != r.b_grid.size() * r.tau_grid.size()) {
        throw DomainError("region_from_json: inconsistent sizes");
    }
    r.estimate = estimate_from_mask(r.b_grid, r.tau_grid, r.mask);
    return r;
}

}  // namespace hahn::io
