// region.hpp — reduced chi-squared maps over a (b, tau_c) grid, acceptance
// regions chi2nu <= min + delta, and intersection of regions from several
// sequence fractions.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hahn/simulation.hpp"

namespace hahn {

inline constexpr double kDefaultDelta = 0.14;

struct GridSpec {
    double b_min = 0.0, b_max = 0.0;  // [1/us]
    std::size_t n_b = 200;
    double tau_min = 0.0, tau_max = 0.0;  // [us]
    std::size_t n_tau = 200;

    /// Linear grid over [lo, hi] x guess on each axis.
    static GridSpec around(const NoiseParams& guess, double lo = 0.2, double hi = 5.0,
                           std::size_t n = 200);
    void validate() const;
    std::vector<double> b_values() const;
    std::vector<double> tau_values() const;
};

struct RegionEstimate {
    double b_center = 0.0, b_half = 0.0;      // [1/us]
    double tau_center = 0.0, tau_half = 0.0;  // [us]
};

struct RegionMap {
    std::vector<double> b_grid;
    std::vector<double> tau_grid;
    std::vector<double> chi2nu;         // row-major: index = i_b * n_tau + i_tau
    std::optional<double> threshold;    // absent for intersections
    double delta = kDefaultDelta;
    std::vector<std::uint8_t> mask;     // same layout as chi2nu
    std::optional<RegionEstimate> estimate;  // absent when the mask is empty
    double chi2nu_min = 0.0;
    std::size_t argmin = 0;
    bool min_on_boundary = false;

    std::size_t n_b() const { return b_grid.size(); }
    std::size_t n_tau() const { return tau_grid.size(); }
    std::size_t index(std::size_t ib, std::size_t it) const { return ib * tau_grid.size() + it; }
    bool accepted(std::size_t ib, std::size_t it) const { return mask[index(ib, it)] != 0; }
    bool empty() const { return !estimate.has_value(); }

    std::size_t accepted_count() const;
    /// Accepted cells times the cell area [us^-1 * us].
    double area() const;
    /// Pearson correlation of (b, tau_c) over accepted grid points; NaN if < 2.
    double accepted_correlation() const;
    bool contains(const NoiseParams& p) const;
};

/// Center and half-width of the accepted extent along each axis.
std::optional<RegionEstimate> estimate_from_mask(const std::vector<double>& b_grid,
                                                 const std::vector<double>& tau_grid,
                                                 const std::vector<std::uint8_t>& mask);

/// Evaluates chi2_nu of the closed-form model at every grid pair and accepts
/// chi2nu <= min + delta. Cells are independent; the result does not depend
/// on evaluation order or thread count.
RegionMap scan_region(const CoherenceCurve& curve, const GridSpec& grid,
                      double delta = kDefaultDelta, unsigned threads = 0);

/// Elementwise AND of masks, elementwise max of chi2nu. Grids must match.
/// An empty intersection is returned as a region with no estimate.
RegionMap intersect_regions(const std::vector<RegionMap>& regions);

}  // namespace hahn
