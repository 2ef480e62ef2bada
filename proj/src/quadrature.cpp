#include "hahn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hahn/noise.hpp"

namespace hahn {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr std::size_t kMaxPanels = 4000;

struct Panel {
    double a = 0.0, b = 0.0;
    double value = 0.0, error = 0.0, l1 = 0.0;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel rule(const std::function<double(double)>& f, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    Panel p{a, b};
    // max_depth = 0: a single 31-point Kronrod rule with its Gauss error estimate.
    p.value = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
    // Below this the difference between the two rules is rounding noise.
    p.error = std::max(p.error, 50.0 * kEps * p.l1);
    return p;
}

struct Sum {
    double value = 0.0, error = 0.0, l1 = 0.0;
};

// Global adaptive bisection of the panel with the largest error, QUADPACK
// QAG style, over several initial panels at once.
Sum adaptive(const std::function<double(double)>& f, std::span<const double> points,
             const QuadratureTolerance& tol) {
    std::priority_queue<Panel> heap;
    Sum s;
    for (std::size_t k = 1; k < points.size(); ++k) {
        if (points[k] == points[k - 1]) continue;
        Panel p = rule(f, points[k - 1], points[k]);
        s.value += p.value;
        s.error += p.error;
        heap.push(p);
    }
    const std::size_t limit = std::max<std::size_t>(kMaxPanels, 4 * heap.size());
    unsigned depth_guard = 0;
    while (!heap.empty() && heap.size() < limit &&
           s.error > std::max(tol.abs, tol.rel * std::abs(s.value))) {
        Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted
        // Splitting a panel that is already at rounding level cannot help.
        if (worst.error <= 50.0 * kEps * worst.l1 * 1.0000001) break;
        heap.pop();
        const Panel left = rule(f, worst.a, mid);
        const Panel right = rule(f, mid, worst.b);
        s.value += left.value + right.value - worst.value;
        s.error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if (++depth_guard > (1u << tol.max_depth)) break;
    }
    // Re-sum from the panels to drop accumulated update rounding.
    s = {};
    while (!heap.empty()) {
        s.value += heap.top().value;
        s.error += heap.top().error;
        s.l1 += heap.top().l1;
        heap.pop();
    }
    return s;
}

bool accepted(const Sum& s, const QuadratureTolerance& tol) {
    if (!std::isfinite(s.value)) return false;
    // Accept results limited only by rounding of the integrand itself.
    return s.error <= std::max({tol.abs, tol.rel * std::abs(s.value), 100.0 * kEps * s.l1});
}

[[noreturn]] void fail(double a, double b, const Sum& s) {
    std::ostringstream msg;
    msg << "integrate: no convergence on [" << a << ", " << b << "]: value=" << s.value
        << " error=" << s.error << " L1=" << s.l1;
    throw NumericError(msg.str());
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureTolerance& tol) {
    const double pts[2] = {a, b};
    return integrate_piecewise(f, pts, tol);
}

QuadratureResult integrate_piecewise(const std::function<double(double)>& f,
                                     std::span<const double> points,
                                     const QuadratureTolerance& tol) {
    if (points.size() < 2) throw DomainError("integrate_piecewise: need at least two points");
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (!std::isfinite(points[k]) || (k > 0 && !(points[k] >= points[k - 1]))) {
            throw DomainError("integrate_piecewise: breakpoints must be finite and non-decreasing");
        }
    }
    if (points.front() == points.back()) return {};
    const Sum s = adaptive(f, points, tol);
    if (!accepted(s, tol)) fail(points.front(), points.back(), s);
    return {s.value, s.error};
}

}  // namespace hahn
