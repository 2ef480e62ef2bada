// least_squares.hpp — bounded Levenberg-Marquardt for two-parameter models.

#pragma once

#include <array>
#include <functional>
#include <vector>

namespace hahn {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

/// Fills residuals r_i(x) and their Jacobian rows dr_i/dx.
using ResidualFn = std::function<void(const Vec2& x, std::vector<double>& residuals,
                                      std::vector<Vec2>& jacobian)>;

struct LmOptions {
    int max_iterations = 500;
    double step_tol = 1e-13;   // relative step size
    double cost_tol = 1e-15;   // relative cost decrease
    double lambda_init = 1e-3;
};

struct LmResult {
    Vec2 x{};
    double cost = 0.0;  // sum of squared residuals
    Mat2 normal{};      // J^T J at x
    int iterations = 0;
    bool converged = false;
};

/// Minimizes sum r_i(x)^2 with lower <= x <= upper (steps are clamped to the box).
LmResult levenberg_marquardt(const ResidualFn& fn, Vec2 start, const Vec2& lower,
                             const Vec2& upper, const LmOptions& options = {});

/// Inverse of a symmetric 2x2 matrix; throws NumericError when singular.
Mat2 invert(const Mat2& m);

}  // namespace hahn
