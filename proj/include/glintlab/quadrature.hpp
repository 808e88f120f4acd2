// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <initializer_list>
#include <limits>
#include <vector>

namespace glintlab::quad {

/// Adaptive Gauss-Kronrod (21 point) on [a, b], relative tolerance `tol`.
template <class F>
double adaptive(F&& f, double a, double b, double tol = 1e-10, unsigned max_depth = 18)
{
    if (!(b > a)) {
        return 0.0;
    }
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, max_depth, tol);
}

/// Adaptive integration over consecutive sub-intervals split at `breaks`
/// (sorted, inside [a, b]); used where the integrand has known kinks or peaks.
template <class F>
double adaptive_split(F&& f, double a, double b, std::vector<double> breaks, double tol = 1e-10,
                      unsigned max_depth = 18)
{
    double total = 0.0;
    double lo = a;
    breaks.push_back(b);
    for (double hi : breaks) {
        if (hi <= lo) {
            continue;
        }
        hi = std::min(hi, b);
        total += adaptive(f, lo, hi, tol, max_depth);
        lo = hi;
    }
    return total;
}

/// Fixed 64-point Gauss-Legendre on [a, b].
template <class F>
double legendre64(F&& f, double a, double b)
{
    if (!(b > a)) {
        return 0.0;
    }
    return boost::math::quadrature::gauss<double, 64>::integrate(f, a, b);
}

} // namespace glintlab::quad
