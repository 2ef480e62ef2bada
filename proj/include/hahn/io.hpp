// io.hpp — CSV and JSON encodings of curves and region maps.
//
// CSV: '.' decimal separator, 9 significant digits, LF line endings. Leading
// '#' lines carry provenance (config hash, seed).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hahn/region.hpp"
#include "hahn/simulation.hpp"

namespace hahn::io {

using Json = nlohmann::ordered_json;

/// Provenance lines written as "# key=value" at the top of every CSV.
using Provenance = std::vector<std::pair<std::string, std::string>>;

std::string format_number(double v);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

void write_curve_csv(std::ostream& os, const CoherenceCurve& curve, const Provenance& prov);
Json curve_to_json(const CoherenceCurve& curve);
CoherenceCurve curve_from_json(const Json& j);

/// Run-length encoding: {"first": 0|1, "runs": [n0, n1, ...]} with runs
/// alternating starting from `first`.
Json encode_mask(const std::vector<std::uint8_t>& mask);
std::vector<std::uint8_t> decode_mask(const Json& j);

/// Triplets (b_kHz, tau_c_us, chi2nu, accepted), one row per grid cell in
/// row-major order.
void write_region_csv(std::ostream& os, const RegionMap& region, const Provenance& prov);
Json region_to_json(const RegionMap& region);
RegionMap region_from_json(const Json& j);
Json estimate_to_json(const RegionMap& region);

}  // namespace hahn::io
