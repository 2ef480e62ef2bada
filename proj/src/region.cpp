#include "hahn/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "hahn/estimation.hpp"

namespace hahn {
namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return out;
}

double spacing(const std::vector<double>& g) {
    return g.size() > 1 ? (g.back() - g.front()) / static_cast<double>(g.size() - 1) : 1.0;
}

}  // namespace

GridSpec GridSpec::around(const NoiseParams& guess, double lo, double hi, std::size_t n) {
    return GridSpec{guess.b * lo, guess.b * hi, n, guess.tau_c * lo, guess.tau_c * hi, n};
}

void GridSpec::validate() const {
    if (n_b == 0 || n_tau == 0) throw DomainError("GridSpec: empty grid");
    if (!(b_min > 0.0 && b_max >= b_min && std::isfinite(b_max)) ||
        !(tau_min > 0.0 && tau_max >= tau_min && std::isfinite(tau_max))) {
        throw DomainError("GridSpec: need 0 < min <= max on both axes");
    }
}

std::vector<double> GridSpec::b_values() const { return linspace(b_min, b_max, n_b); }
std::vector<double> GridSpec::tau_values() const { return linspace(tau_min, tau_max, n_tau); }

std::size_t RegionMap::accepted_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

double RegionMap::area() const {
    return static_cast<double>(accepted_count()) * spacing(b_grid) * spacing(tau_grid);
}

double RegionMap::accepted_correlation() const {
    double n = 0, sb = 0, st = 0, sbb = 0, stt = 0, sbt = 0;
    for (std::size_t ib = 0; ib < n_b(); ++ib) {
        for (std::size_t it = 0; it < n_tau(); ++it) {
            if (!accepted(ib, it)) continue;
            const double b = b_grid[ib];
            const double t = tau_grid[it];
            n += 1, sb += b, st += t, sbb += b * b, stt += t * t, sbt += b * t;
        }
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double cov = sbt / n - (sb / n) * (st / n);
    const double vb = sbb / n - (sb / n) * (sb / n);
    const double vt = stt / n - (st / n) * (st / n);
    if (!(vb > 0.0 && vt > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return cov / std::sqrt(vb * vt);
}

bool RegionMap::contains(const NoiseParams& p) const {
    if (empty()) return false;
    // Nearest grid cell to p.
    const auto nearest = [](const std::vector<double>& g, double v) -> std::optional<std::size_t> {
        const double h = spacing(g);
        if (v < g.front() - 0.5 * h || v > g.back() + 0.5 * h) return std::nullopt;
        const auto k = static_cast<long>(std::lround((v - g.front()) / h));
        return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(g.size()) - 1));
    };
    const auto ib = nearest(b_grid, p.b);
    const auto it = nearest(tau_grid, p.tau_c);
    return ib && it && accepted(*ib, *it);
}

std::optional<RegionEstimate> estimate_from_mask(const std::vector<double>& b_grid,
                                                 const std::vector<double>& tau_grid,
                                                 const std::vector<std::uint8_t>& mask) {
    std::size_t b_lo = b_grid.size(), b_hi = 0, t_lo = tau_grid.size(), t_hi = 0;
    bool any = false;
    for (std::size_t ib = 0; ib < b_grid.size(); ++ib) {
        for (std::size_t it = 0; it < tau_grid.size(); ++it) {
            if (!mask[ib * tau_grid.size() + it]) continue;
            any = true;
            b_lo = std::min(b_lo, ib), b_hi = std::max(b_hi, ib);
            t_lo = std::min(t_lo, it), t_hi = std::max(t_hi, it);
        }
    }
    if (!any) return std::nullopt;
    RegionEstimate e;
    e.b_center = 0.5 * (b_grid[b_lo] + b_grid[b_hi]);
    e.b_half = 0.5 * (b_grid[b_hi] - b_grid[b_lo]);
    e.tau_center = 0.5 * (tau_grid[t_lo] + tau_grid[t_hi]);
    e.tau_half = 0.5 * (tau_grid[t_hi] - tau_grid[t_lo]);
    return e;
}

RegionMap scan_region(const CoherenceCurve& curve, const GridSpec& grid, double delta,
                      unsigned threads) {
    curve.validate();
    grid.validate();
    if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("scan_region: delta must be > 0");
    const int dof = static_cast<int>(curve.size()) - kFittedParams;
    if (dof <= 0) throw DomainError("scan_region: degrees of freedom must be positive");
    std::vector<double> inv_sigma(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (!(curve.sigmas[i] > 0.0)) throw DomainError("scan_region: sigma must be > 0");
        inv_sigma[i] = 1.0 / curve.sigmas[i];
    }

    RegionMap map;
    map.b_grid = grid.b_values();
    map.tau_grid = grid.tau_values();
    map.delta = delta;
    map.chi2nu.assign(map.b_grid.size() * map.tau_grid.size(), 0.0);

    // One tau_c column per task: the decay exponent depends only on tau_c.
    const auto column = [&](std::size_t it) {
        const double tau = map.tau_grid[it];
        std::vector<double> g(curve.size());
        for (std::size_t i = 0; i < curve.size(); ++i) g[i] = decay_exponent(curve.times[i] / tau, curve.alpha);
        for (std::size_t ib = 0; ib < map.b_grid.size(); ++ib) {
            const double bt = map.b_grid[ib] * tau;
            const double bt2 = bt * bt;
            double sum = 0.0;
            for (std::size_t i = 0; i < curve.size(); ++i) {
                const double z = (curve.values[i] - std::exp(-bt2 * g[i])) * inv_sigma[i];
                sum += z * z;
            }
            map.chi2nu[map.index(ib, it)] = sum / dof;
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::size_t>(threads == 0 ? hw : threads, map.tau_grid.size()));
    if (n_threads <= 1) {
        for (std::size_t it = 0; it < map.tau_grid.size(); ++it) column(it);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < n_threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t it = w; it < map.tau_grid.size(); it += n_threads) column(it);
            });
        }
    }

    const auto min_it = std::min_element(map.chi2nu.begin(), map.chi2nu.end());
    map.argmin = static_cast<std::size_t>(min_it - map.chi2nu.begin());
    map.chi2nu_min = *min_it;
    map.threshold = map.chi2nu_min + delta;
    map.mask.resize(map.chi2nu.size());
    for (std::size_t k = 0; k < map.chi2nu.size(); ++k) map.mask[k] = map.chi2nu[k] <= *map.threshold;
    const std::size_t ib = map.argmin / map.n_tau();
    const std::size_t it = map.argmin % map.n_tau();
    map.min_on_boundary = ib == 0 || ib + 1 == map.n_b() || it == 0 || it + 1 == map.n_tau();
    map.estimate = estimate_from_mask(map.b_grid, map.tau_grid, map.mask);
    return map;
}

RegionMap intersect_regions(const std::vector<RegionMap>& regions) {
    if (regions.empty()) throw DomainError("intersect_regions: no regions");
    const RegionMap& first = regions.front();
    for (const RegionMap& r : regions) {
        if (r.b_grid != first.b_grid || r.tau_grid != first.tau_grid) {
            throw DomainError("intersect_regions: regions must share identical grids");
        }
    }
    RegionMap out;
    out.b_grid = first.b_grid;
    out.tau_grid = first.tau_grid;
    out.delta = first.delta;
    out.chi2nu = first.chi2nu;
    out.mask = first.mask;
    for (std::size_t k = 1; k < regions.size(); ++k) {
        for (std::size_t c = 0; c < out.mask.size(); ++c) {
            out.mask[c] = out.mask[c] && regions[k].mask[c];
            out.chi2nu[c] = std::max(out.chi2nu[c], regions[k].chi2nu[c]);
        }
    }
    if (regions.size() == 1) out.threshold = first.threshold;
    const auto min_it = std::min_element(out.chi2nu.begin(), out.chi2nu.end());
    out.argmin = static_cast<std::size_t>(min_it - out.chi2nu.begin());
    out.chi2nu_min = *min_it;
    const std::size_t ib = out.argmin / out.n_tau();
    const std::size_t it = out.argmin % out.n_tau();
    out.min_on_boundary = ib == 0 || ib + 1 == out.n_b() || it == 0 || it + 1 == out.n_tau();
    out.estimate = estimate_from_mask(out.b_grid, out.tau_grid, out.mask);
    return out;
}

}  // namespace hahn
