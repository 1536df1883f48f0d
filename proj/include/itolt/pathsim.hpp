#pragma once

// Continuous semimartingales on uniform time grids: Brownian motion and
// Euler-Maruyama Ito processes, stochastic sums, curve shifts and exit times.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "itolt/bv2d.hpp"
#include "itolt/rng.hpp"

namespace itolt {

struct TimeGrid {
    double horizon = 1.0;
    std::size_t n_steps = 1;

    void validate() const {
        if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("TimeGrid: horizon must be > 0");
    }
    double dt() const { return horizon / static_cast<double>(n_steps); }
    double t(std::size_t k) const {
        return k == n_steps ? horizon : horizon * static_cast<double>(k) / static_cast<double>(n_steps);
    }
};

/// X(t_k) = X(0) + M(t_k) + V(t_k), stored component-wise. x is always
/// computed as (x0 + m) + v so the decomposition holds bit-for-bit.
struct SemimartingalePath {
    TimeGrid grid;
    double x0 = 0.0;
    std::vector<double> x;
    std::vector<double> m;
    std::vector<double> v;
    std::vector<double> qv;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    std::string rng_id{kRngId};

    std::size_t steps() const { return grid.n_steps; }

    /// The path stopped at grid index k >= 1 (horizon becomes t_k).
    SemimartingalePath prefix(std::size_t k) const {
        if (k == 0 || k > grid.n_steps) throw std::out_of_range("SemimartingalePath::prefix: need 1 <= k <= n_steps");
        SemimartingalePath out = *this;
        out.x.resize(k + 1);
        out.m.resize(k + 1);
        out.v.resize(k + 1);
        out.qv.resize(k + 1);
        out.grid = {grid.t(k), k};
        return out;
    }
};

using Coefficient = std::function<double(double, double)>;

/// dX = sigma(t, X) dW + b(t, X) dt with uniform ellipticity sigma >= delta
/// and |sigma| + |b| <= K.
struct ItoProcessSpec {
    Coefficient sigma = [](double, double) { return 1.0; };
    Coefficient drift = [](double, double) { return 0.0; };
    double x0 = 0.0;
    double delta = 1.0;
    double bound = 1.0;  // K
    std::string description = "sigma=1, b=0";

    /// Spot-checks the bounds on a (samples x samples) grid over `domain`.
    void validate(const Rect& domain, std::size_t samples = 33) const {
        if (!(delta > 0.0)) throw std::invalid_argument("ItoProcessSpec: delta must be > 0");
        if (!(bound >= delta)) throw std::invalid_argument("ItoProcessSpec: K must be >= delta");
        for (std::size_t i = 0; i < samples; ++i) {
            for (std::size_t j = 0; j < samples; ++j) {
                const double t = domain.s_lo + (domain.s_hi - domain.s_lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
                const double x = domain.x_lo + (domain.x_hi - domain.x_lo) * static_cast<double>(j) / static_cast<double>(samples - 1);
                const double s = sigma(t, x);
                const double b = drift(t, x);
                if (!(s >= delta) || !(std::abs(s) + std::abs(b) <= bound)) {
                    std::ostringstream msg;
                    msg << "ItoProcessSpec: bounds violated at (t=" << t << ", x=" << x << "): sigma=" << s
                        << ", b=" << b << ", delta=" << delta << ", K=" << bound;
                    throw std::invalid_argument(msg.str());
                }
            }
        }
    }
};

/// A continuous curve x = l(t) of locally bounded variation.
struct Curve {
    std::function<double(double)> l = [](double) { return 0.0; };
    std::string description = "l=0";

    double operator()(double t) const { return l(t); }

    /// Total variation on [0, T] from a fine uniform sampling (a lower bound
    /// that is exact for piecewise-monotone curves in the limit).
    double variation(double horizon, std::size_t samples = std::size_t{1} << 14) const {
        double total = 0.0;
        double prev = l(0.0);
        for (std::size_t k = 1; k <= samples; ++k) {
            const double cur = l(horizon * static_cast<double>(k) / static_cast<double>(samples));
            total += std::abs(cur - prev);
            prev = cur;
        }
        return total;
    }
};

inline SemimartingalePath simulate_bm(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_index = 0,
                                      double x0 = 0.0) {
    grid.validate();
    const std::size_t n = grid.n_steps;
    SemimartingalePath p;
    p.grid = grid;
    p.x0 = x0;
    p.seed = seed;
    p.path_index = path_index;
    p.x.resize(n + 1);
    p.m.resize(n + 1);
    p.v.assign(n + 1, 0.0);
    p.qv.resize(n + 1);
    p.m[0] = 0.0;
    p.qv[0] = 0.0;
    p.x[0] = (x0 + p.m[0]) + p.v[0];
    NormalStream rng(seed, path_index);
    const double sd = std::sqrt(grid.dt());
    for (std::size_t k = 0; k < n; ++k) {
        p.m[k + 1] = p.m[k] + sd * rng.next();
        const double dm = p.m[k + 1] - p.m[k];
        p.qv[k + 1] = p.qv[k] + dm * dm;
        p.x[k + 1] = (x0 + p.m[k + 1]) + p.v[k + 1];
    }
    return p;
}

/// Euler-Maruyama. M collects sigma*dW, V collects b*dt and the quadratic
/// variation accumulates sigma^2 dt. Non-finite coefficients abort the path.
inline SemimartingalePath simulate_ito(const ItoProcessSpec& spec, const TimeGrid& grid, std::uint64_t seed,
                                       std::uint64_t path_index = 0) {
    grid.validate();
    const std::size_t n = grid.n_steps;
    SemimartingalePath p;
    p.grid = grid;
    p.x0 = spec.x0;
    p.seed = seed;
    p.path_index = path_index;
    p.x.resize(n + 1);
    p.m.resize(n + 1);
    p.v.resize(n + 1);
    p.qv.resize(n + 1);
    p.m[0] = 0.0;
    p.v[0] = 0.0;
    p.qv[0] = 0.0;
    p.x[0] = (spec.x0 + p.m[0]) + p.v[0];
    NormalStream rng(seed, path_index);
    const double dt = grid.dt();
    const double sd = std::sqrt(dt);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = grid.t(k);
        const double sig = spec.sigma(t, p.x[k]);
        const double b = spec.drift(t, p.x[k]);
        if (!std::isfinite(sig) || !std::isfinite(b)) {
            std::ostringstream msg;
            msg << "simulate_ito: non-finite coefficient at step " << k << " (t=" << t << ", x=" << p.x[k]
                << "): sigma=" << sig << ", b=" << b;
            throw std::runtime_error(msg.str());
        }
        p.m[k + 1] = p.m[k] + sig * (sd * rng.next());
        p.v[k + 1] = p.v[k] + b * dt;
        p.qv[k + 1] = p.qv[k] + sig * sig * dt;
        p.x[k + 1] = (spec.x0 + p.m[k + 1]) + p.v[k + 1];
        if (!std::isfinite(p.x[k + 1])) {
            throw std::runtime_error("simulate_ito: path became non-finite at step " + std::to_string(k + 1));
        }
    }
    return p;
}

enum class Integrator { dX, dM, dV };

/// Left-endpoint (Ito) sum  sum_k h(t_k) (Y(t_{k+1}) - Y(t_k)), Y in {X, M, V}.
/// h holds either n_steps or n_steps + 1 samples (the last one is unused).
inline double ito_integral(std::span<const double> h, const SemimartingalePath& path,
                           Integrator against = Integrator::dX) {
    const std::size_t n = path.steps();
    if (h.size() != n && h.size() != n + 1) {
        throw std::invalid_argument("ito_integral: integrand length " + std::to_string(h.size()) +
                                    " does not match path with " + std::to_string(n) + " steps");
    }
    const std::vector<double>& y = against == Integrator::dX ? path.x : against == Integrator::dM ? path.m : path.v;
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += h[k] * (y[k + 1] - y[k]);
    return total;
}

/// X* = X - l. The curve is absorbed into the bounded-variation part,
/// V* = V - (l - l(0)); M and the quadratic variation are untouched.
inline SemimartingalePath shift_by_curve(const SemimartingalePath& path, const Curve& curve) {
    SemimartingalePath out = path;
    const double l0 = curve(0.0);
    out.x0 = path.x0 - l0;
    for (std::size_t k = 0; k < path.x.size(); ++k) {
        out.v[k] = path.v[k] - (curve(path.grid.t(k)) - l0);
        out.x[k] = (out.x0 + out.m[k]) + out.v[k];
    }
    return out;
}

/// Smallest k with |X(t_k)| >= N, or n_steps if the level is never reached.
inline std::size_t first_exit(const SemimartingalePath& path, double level) {
    if (!(level > 0.0)) throw std::invalid_argument("first_exit: N must be > 0");
    for (std::size_t k = 0; k < path.x.size(); ++k) {
        if (std::abs(path.x[k]) >= level) return k;
    }
    return path.steps();
}

}  // namespace itolt
