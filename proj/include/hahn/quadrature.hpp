// quadrature.hpp — adaptive Gauss-Kronrod integration with absolute and
// relative tolerances and explicit failure on non-convergence.

#pragma once

#include <functional>
#include <span>

namespace hahn {

struct QuadratureTolerance {
    double abs = 1e-12;
    double rel = 1e-9;
    unsigned max_depth = 30;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Integrates f over [a, b]. Throws NumericError if the error estimate
/// exceeds max(tol.abs, tol.rel * |value|).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureTolerance& tol = {});

/// Integrates f over [points.front(), points.back()], splitting at every
/// interior breakpoint. Breakpoints must be non-decreasing.
QuadratureResult integrate_piecewise(const std::function<double(double)>& f,
                                     std::span<const double> points,
                                     const QuadratureTolerance& tol = {});

}  // namespace hahn
