#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

namespace itolt::quad {

/// Fixed Gauss-Legendre rule mapped onto [a, b].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule of arbitrary order on [a, b]; nodes come from
/// Boost's Legendre zeros, so any order >= 1 is available at runtime.
inline GaussRule gauss_legendre(int order, double a, double b) {
    if (order < 1) {
        throw std::invalid_argument("gauss_legendre: order must be >= 1");
    }
    const auto positive = boost::math::legendre_p_zeros<double>(order);
    std::vector<double> ref;
    ref.reserve(static_cast<std::size_t>(order));
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
        if (*it != 0.0) ref.push_back(-*it);
    }
    for (double z : positive) ref.push_back(z);
    std::sort(ref.begin(), ref.end());

    GaussRule rule;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (double z : ref) {
        const double p = boost::math::legendre_p_prime(order, z);
        rule.nodes.push_back(mid + half * z);
        rule.weights.push_back(half * 2.0 / ((1.0 - z * z) * p * p));
    }
    return rule;
}

/// Adaptive Gauss-Kronrod (31 points) on [a, b], split at any interior
/// breakpoints so declared discontinuities fall on panel edges.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, std::vector<double> breakpoints = {}) {
    if (!(b > a)) return 0.0;
    std::vector<double> cuts{a};
    std::sort(breakpoints.begin(), breakpoints.end());
    for (double c : breakpoints) {
        if (c > cuts.back() && c < b) cuts.push_back(c);
    }
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            f, cuts[i], cuts[i + 1], 20, tol);
    }
    return total;
}

/// Iterated adaptive integral over [s0,s1] x [x0,x1] (outer variable s).
inline double integrate_2d(const std::function<double(double, double)>& f, double s0, double s1,
                           double x0, double x1, double tol = 1e-10,
                           std::vector<double> s_breaks = {}, std::vector<double> x_breaks = {}) {
    auto inner = [&](double s) {
        return integrate([&](double x) { return f(s, x); }, x0, x1, tol, x_breaks);
    };
    return integrate(inner, s0, s1, tol, std::move(s_breaks));
}

}  // namespace itolt::quad
