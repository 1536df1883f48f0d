#pragma once

// Local-time fields of a discretized semimartingale. L is half the
// occupation density: the occupation formula reads
//   int g(s, X_s) d<M>_s = 2 int int g(s, a) dL_s(a) da.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "itolt/pathsim.hpp"

namespace itolt {

inline constexpr const char* kLocalTimeConvention = "half-occupation-density";

/// Uniform levels a_j = (j_lo + j + offset) * delta, j = 0..count-1. Level j
/// owns the half-open bin [a_j, a_j + delta).
struct LevelGrid {
    double delta = 1.0 / 128.0;
    double offset = 0.5;
    std::int64_t j_lo = 0;
    std::size_t count = 0;

    void validate() const {
        if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("LevelGrid: delta must be > 0");
        if (count == 0) throw std::invalid_argument("LevelGrid: no levels");
    }

    double level(std::size_t j) const {
        return (static_cast<double>(j_lo + static_cast<std::int64_t>(j)) + offset) * delta;
    }
    /// Right end of the last bin.
    double upper() const { return level(count); }

    /// Global bin index of x (may lie outside [0, count)).
    std::int64_t global_bin(double x) const { return static_cast<std::int64_t>(std::floor(x / delta - offset)); }

    /// Bin index of x, or -1 when x is outside the grid.
    std::int64_t bin_of(double x) const {
        const std::int64_t g = global_bin(x) - j_lo;
        return (g < 0 || g >= static_cast<std::int64_t>(count)) ? -1 : g;
    }

    /// Smallest grid whose bins cover [lo - delta, hi + delta].
    static LevelGrid covering(double lo, double hi, double delta, double offset = 0.5) {
        if (!(hi >= lo)) throw std::invalid_argument("LevelGrid::covering: need hi >= lo");
        LevelGrid g{delta, offset, 0, 1};
        g.validate();
        g.j_lo = g.global_bin(lo - delta) - 1;
        const std::int64_t j_hi = g.global_bin(hi + delta) + 1;
        g.count = static_cast<std::size_t>(j_hi - g.j_lo + 1);
        return g;
    }

    static LevelGrid covering(const SemimartingalePath& path, double delta, double offset = 0.5) {
        const auto [lo, hi] = std::minmax_element(path.x.begin(), path.x.end());
        return covering(*lo, *hi, delta, offset);
    }
};

/// How the level spacing is chosen for a path. A NaN delta ties it to the
/// time step: delta = factor * sqrt(dt).
struct LevelPolicy {
    double delta = std::numeric_limits<double>::quiet_NaN();
    double factor = 2.0;
    double offset = 0.5;

    double resolve(const TimeGrid& g) const { return std::isnan(delta) ? factor * std::sqrt(g.dt()) : delta; }
    LevelGrid grid_for(const SemimartingalePath& path) const {
        return LevelGrid::covering(path, resolve(path.grid), offset);
    }
};

/// One contribution to a level: X(t_step) fell in the bin; `cumulative` is
/// L(t, a_j) for t_step < t up to the next visit.
struct LocalTimeEvent {
    std::size_t step = 0;
    double increment = 0.0;
    double cumulative = 0.0;
};

/// L(t_k, a_j) on (time grid x level grid), stored as per-level visit lists.
/// L is piecewise constant: in time between visits, in level on each bin.
class LocalTimeField {
public:
    LocalTimeField() = default;

    /// Builds the occupation estimator from state samples x[0..n] and
    /// quadratic-variation samples qv[0..n].
    LocalTimeField(const TimeGrid& grid, LevelGrid levels, std::span<const double> x, std::span<const double> qv)
        : grid_(grid), levels_(levels) {
        grid_.validate();
        levels_.validate();
        const std::size_t n = grid_.n_steps;
        if (x.size() != n + 1 || qv.size() != n + 1) {
            throw std::invalid_argument("LocalTimeField: samples do not match the time grid");
        }
        const double scale = 1.0 / (2.0 * levels_.delta);
        std::vector<std::int64_t> bins(n);
        offsets_.assign(levels_.count + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            bins[i] = levels_.bin_of(x[i]);
            if (bins[i] >= 0) {
                ++offsets_[static_cast<std::size_t>(bins[i]) + 1];
            } else {
                dropped_ += qv[i + 1] - qv[i];
            }
        }
        for (std::size_t j = 0; j < levels_.count; ++j) offsets_[j + 1] += offsets_[j];
        events_.resize(offsets_.back());
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        std::vector<double> running(levels_.count, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (bins[i] < 0) continue;
            const auto j = static_cast<std::size_t>(bins[i]);
            const double inc = (qv[i + 1] - qv[i]) * scale;
            running[j] += inc;
            events_[fill[j]++] = {i, inc, running[j]};
        }
    }

    const TimeGrid& grid() const { return grid_; }
    const LevelGrid& levels() const { return levels_; }
    std::size_t steps() const { return grid_.n_steps; }
    double epsilon() const { return levels_.delta; }
    const char* convention() const { return kLocalTimeConvention; }

    /// Quadratic variation accrued while X was outside the level grid.
    double dropped_mass() const { return dropped_; }

    std::span<const LocalTimeEvent> events(std::size_t j) const {
        return {events_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
    }

    /// L(t_k, a_j): the sum of contributions from steps i < k.
    double at(std::size_t k, std::size_t j) const {
        const auto ev = events(j);
        auto it = std::lower_bound(ev.begin(), ev.end(), k,
                                   [](const LocalTimeEvent& e, std::size_t kk) { return e.step < kk; });
        return it == ev.begin() ? 0.0 : std::prev(it)->cumulative;
    }

    double final(std::size_t j) const {
        const auto ev = events(j);
        return ev.empty() ? 0.0 : ev.back().cumulative;
    }

    /// L(t_k, a) with the cadlag piecewise-constant convention in a.
    double value_at_level(std::size_t k, double a) const {
        const auto j = levels_.bin_of(a);
        return j < 0 ? 0.0 : at(k, static_cast<std::size_t>(j));
    }

    /// t -> L(t_k, a_j) for k = 0..n.
    std::vector<double> series(std::size_t j) const {
        std::vector<double> out(grid_.n_steps + 1, 0.0);
        double value = 0.0;
        std::size_t k = 0;
        for (const auto& e : events(j)) {
            for (; k <= e.step; ++k) out[k] = value;
            value = e.cumulative;
        }
        for (; k <= grid_.n_steps; ++k) out[k] = value;
        return out;
    }

    /// 2 * sum_j L(t_k, a_j) * delta, which should match qv(t_k).
    double total_mass(std::size_t k) const {
        double s = 0.0;
        for (std::size_t j = 0; j < levels_.count; ++j) s += at(k, j);
        return 2.0 * levels_.delta * s;
    }

    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;

private:
    TimeGrid grid_;
    LevelGrid levels_;
    std::vector<std::size_t> offsets_;
    std::vector<LocalTimeEvent> events_;
    double dropped_ = 0.0;
};

/// L(t_k, a_j) = 1/(2 da) sum_{i<k} 1_[a_j, a_j + da)(X(t_i)) (qv_{i+1} - qv_i).
inline LocalTimeField local_time_occupation(const SemimartingalePath& path, const LevelGrid& levels) {
    LocalTimeField out(path.grid, levels, path.x, path.qv);
    out.seed = path.seed;
    out.path_index = path.path_index;
    return out;
}

inline LocalTimeField local_time_occupation(const SemimartingalePath& path, const LevelPolicy& policy = {}) {
    return local_time_occupation(path, policy.grid_for(path));
}

/// Left sign: +1 for y > 0, -1 otherwise.
inline double sgn_left(double y) { return y > 0.0 ? 1.0 : -1.0; }

/// L_t(a) = (|X_t - a| - |X_0 - a| - int_0^t sgn-(X_s - a) dX_s) / 2 along the grid.
/// Not clamped; it is used as an independent oracle.
inline std::vector<double> local_time_tanaka(const SemimartingalePath& path, double a) {
    const std::size_t n = path.steps();
    std::vector<double> out(n + 1, 0.0);
    const double base = std::abs(path.x[0] - a);
    double integral = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        integral += sgn_left(path.x[k] - a) * (path.x[k + 1] - path.x[k]);
        out[k + 1] = 0.5 * ((std::abs(path.x[k + 1] - a) - base) - integral);
    }
    return out;
}

/// sum_k phi(t_k) (L(t_{k+1}) - L(t_k)).
inline double dt_stieltjes(std::span<const double> phi, std::span<const double> L) {
    if (L.empty() || (phi.size() != L.size() && phi.size() + 1 != L.size())) {
        throw std::invalid_argument("dt_stieltjes: phi and L lengths do not match");
    }
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < L.size(); ++k) total += phi[k] * (L[k + 1] - L[k]);
    return total;
}

struct OccupationCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_err = 0.0;
};

/// lhs = sum_k g(t_k, X_k) dqv_k, rhs = 2 int int g(s, a) dL_s(a) da with L
/// piecewise constant on each bin; the bin integral of g uses its midpoint.
inline OccupationCheck occupation_check(const std::function<double(double, double)>& g, const SemimartingalePath& path,
                                        const LevelGrid& levels) {
    const LocalTimeField field = local_time_occupation(path, levels);
    OccupationCheck out;
    for (std::size_t k = 0; k < path.steps(); ++k) {
        const double dq = path.qv[k + 1] - path.qv[k];
        if (dq != 0.0) out.lhs += g(path.grid.t(k), path.x[k]) * dq;
    }
    const double da = levels.delta;
    for (std::size_t j = 0; j < levels.count; ++j) {
        const double mid = levels.level(j) + 0.5 * da;
        double s = 0.0;
        for (const auto& e : field.events(j)) s += g(path.grid.t(e.step), mid) * e.increment;
        out.rhs += 2.0 * da * s;
    }
    if (out.lhs == 0.0 && out.rhs == 0.0) return out;
    out.rel_err = std::abs(out.rhs - out.lhs) / std::max(std::abs(out.lhs), std::numeric_limits<double>::min());
    return out;
}

/// Local time of X* = X - l.
inline LocalTimeField curve_local_time(const SemimartingalePath& path, const Curve& curve, const LevelGrid& levels) {
    return local_time_occupation(shift_by_curve(path, curve), levels);
}

inline LocalTimeField curve_local_time(const SemimartingalePath& path, const Curve& curve,
                                       const LevelPolicy& policy = {}) {
    return local_time_occupation(shift_by_curve(path, curve), policy);
}

}  // namespace itolt
