#include "hahn/least_squares.hpp"

#include <algorithm>
#include <cmath>

#include "hahn/noise.hpp"

namespace hahn {
namespace {

struct Evaluation {
    std::vector<double> residuals;
    std::vector<Vec2> jacobian;
    double cost = 0.0;
    Mat2 normal{};
    Vec2 gradient{};  // J^T r
};

void evaluate(const ResidualFn& fn, const Vec2& x, Evaluation& ev) {
    fn(x, ev.residuals, ev.jacobian);
    ev.cost = 0.0;
    ev.normal = {};
    ev.gradient = {};
    for (std::size_t i = 0; i < ev.residuals.size(); ++i) {
        const double r = ev.residuals[i];
        const Vec2& j = ev.jacobian[i];
        ev.cost += r * r;
        for (int a = 0; a < 2; ++a) {
            ev.gradient[a] += j[a] * r;
            for (int b = 0; b < 2; ++b) ev.normal[a][b] += j[a] * j[b];
        }
    }
}

Vec2 clamp(const Vec2& x, const Vec2& lower, const Vec2& upper) {
    return {std::clamp(x[0], lower[0], upper[0]), std::clamp(x[1], lower[1], upper[1])};
}

}  // namespace

Mat2 invert(const Mat2& m) {
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    const double scale = std::abs(m[0][0] * m[1][1]) + std::abs(m[0][1] * m[1][0]);
    if (!(std::abs(det) > 1e-300) || !(std::abs(det) > 1e-14 * scale)) {
        throw NumericError("invert: singular 2x2 matrix");
    }
    return {{{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}}};
}

LmResult levenberg_marquardt(const ResidualFn& fn, Vec2 start, const Vec2& lower,
                             const Vec2& upper, const LmOptions& options) {
    Vec2 x = clamp(start, lower, upper);
    Evaluation cur;
    Evaluation trial;
    evaluate(fn, x, cur);

    LmResult out;
    double lambda = options.lambda_init;
    for (int it = 0; it < options.max_iterations; ++it) {
        out.iterations = it + 1;
        if (cur.cost == 0.0) {
            out.converged = true;
            break;
        }
        // Marquardt scaling: damp along the diagonal of J^T J.
        Mat2 damped = cur.normal;
        for (int a = 0; a < 2; ++a) {
            damped[a][a] += lambda * std::max(cur.normal[a][a], 1e-300);
        }
        Vec2 step;
        try {
            const Mat2 inv = invert(damped);
            step = {-(inv[0][0] * cur.gradient[0] + inv[0][1] * cur.gradient[1]),
                    -(inv[1][0] * cur.gradient[0] + inv[1][1] * cur.gradient[1])};
        } catch (const NumericError&) {
            lambda *= 10.0;
            if (lambda > 1e20) break;
            continue;
        }

        const Vec2 candidate = clamp({x[0] + step[0], x[1] + step[1]}, lower, upper);
        const double step_norm =
            std::hypot((candidate[0] - x[0]) / std::max(std::abs(x[0]), 1e-300),
                       (candidate[1] - x[1]) / std::max(std::abs(x[1]), 1e-300));
        evaluate(fn, candidate, trial);

        if (std::isfinite(trial.cost) && trial.cost < cur.cost) {
            const double decrease = (cur.cost - trial.cost) / cur.cost;
            x = candidate;
            std::swap(cur, trial);
            lambda = std::max(lambda / 10.0, 1e-12);
            if (step_norm < options.step_tol || decrease < options.cost_tol) {
                out.converged = true;
                break;
            }
        } else {
            if (step_norm < options.step_tol) {
                out.converged = true;
                break;
            }
            lambda *= 10.0;
            // No downhill step exists at any damping: a minimum to working precision.
            if (lambda > 1e20) {
                out.converged = true;
                break;
            }
        }
    }
    out.x = x;
    out.cost = cur.cost;
    out.normal = cur.normal;
    return out;
}

}  // namespace hahn
