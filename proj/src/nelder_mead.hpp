// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace glintlab::detail {

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> x{};
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free Nelder-Mead minimization with the standard coefficients.
/// Stops when the spread of the simplex values falls below
/// ftol * (|best| + tiny), when every vertex lies within xtol (relative) of
/// the best one, or after max_iterations.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, const std::array<double, N>& start, const std::array<double, N>& step,
                             int max_iterations, double ftol = 1e-6, double xtol = 1e-6)
{
    using Point = std::array<double, N>;
    std::array<Point, N + 1> pts;
    std::array<double, N + 1> vals;
    pts[0] = start;
    for (std::size_t i = 0; i < N; ++i) {
        pts[i + 1] = start;
        pts[i + 1][i] += step[i];
    }
    for (std::size_t i = 0; i <= N; ++i) {
        vals[i] = f(pts[i]);
    }

    auto blend = [](const Point& a, const Point& b, double t) {
        Point r;
        for (std::size_t i = 0; i < N; ++i) {
            r[i] = a[i] + t * (b[i] - a[i]);
        }
        return r;
    };

    SimplexResult<N> result;
    std::array<std::size_t, N + 1> order;
    int it = 0;
    for (; it < max_iterations; ++it) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[N - 1];

        if (std::isfinite(vals[worst]) &&
            vals[worst] - vals[best] <= ftol * (std::abs(vals[best]) + 1e-300)) {
            result.converged = true;
            break;
        }
        double spread = 0.0;
        double size = 0.0;
        for (std::size_t k = 0; k <= N; ++k) {
            for (std::size_t i = 0; i < N; ++i) {
                spread = std::max(spread, std::abs(pts[k][i] - pts[best][i]));
                size = std::max(size, std::abs(pts[best][i]));
            }
        }
        if (std::isfinite(vals[best]) && spread <= xtol * (size + xtol)) {
            result.converged = true;
            break;
        }

        Point centroid{};
        for (std::size_t k = 0; k < N; ++k) {
            const std::size_t idx = order[k];
            for (std::size_t i = 0; i < N; ++i) {
                centroid[i] += pts[idx][i] / static_cast<double>(N);
            }
        }

        const Point reflected = blend(centroid, pts[worst], -1.0);
        const double f_reflected = f(reflected);
        if (f_reflected < vals[best]) {
            const Point expanded = blend(centroid, pts[worst], -2.0);
            const double f_expanded = f(expanded);
            if (f_expanded < f_reflected) {
                pts[worst] = expanded;
                vals[worst] = f_expanded;
            } else {
                pts[worst] = reflected;
                vals[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < vals[worst];
        const Point contracted = outside ? blend(centroid, reflected, 0.5) : blend(centroid, pts[worst], 0.5);
        const double f_contracted = f(contracted);
        if (f_contracted < (outside ? f_reflected : vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = f_contracted;
            continue;
        }
        for (std::size_t k = 1; k <= N; ++k) {
            const std::size_t idx = order[k];
            pts[idx] = blend(pts[best], pts[idx], 0.5);
            vals[idx] = f(pts[idx]);
        }
    }

    const auto best_it = std::min_element(vals.begin(), vals.end());
    const auto best_idx = static_cast<std::size_t>(best_it - vals.begin());
    result.x = pts[best_idx];
    result.value = *best_it;
    result.iterations = it;
    return result;
}

} // namespace glintlab::detail
