#pragma once

// Term-by-term evaluation of generalized Ito identities along simulated
// paths, the Krylov estimate, and residual refinement studies.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "itolt/bv2d.hpp"
#include "itolt/localtime.hpp"
#include "itolt/parallel.hpp"
#include "itolt/pathsim.hpp"
#include "itolt/quadrature.hpp"
#include "itolt/stats.hpp"

namespace itolt {

using Fn2 = std::function<double(double, double)>;

/// shifted: the split f = f_h + f_v with grad_left_v(t, x + l(t)) of bounded
/// variation; jump: f is C^1 in x off the curve, with a gradient jump across it.
enum class CurveForm { jump, shifted };

inline const char* to_string(CurveForm f) { return f == CurveForm::jump ? "jump" : "shifted"; }

struct CurveSpec {
    Curve l;
    CurveForm form = CurveForm::jump;
    /// grad f(t, l(t)+) - grad f(t, l(t)-)
    std::function<double(double)> jump = [](double) { return 0.0; };
    /// (t, y) -> grad_left_v(t, y + l(t)), used by the shifted form.
    Surface2D shifted_grad_left_v;
};

struct VariantFlags {
    bool semimartingale = true;  // left-continuous derivatives, BV gradient part
    bool curve = false;
    bool ito_process = true;     // derivatives may be merely square-integrable
};

/// The f of an Ito formula. lap_left_h is the left second derivative of the
/// smooth part f_h (or of f itself off the curve for the jump form).
struct FunctionSpec {
    std::string name;
    Fn2 f;
    Fn2 dt_left;
    Fn2 grad_left;
    Fn2 f_h = [](double, double) { return 0.0; };
    Fn2 lap_left_h = [](double, double) { return 0.0; };
    Fn2 f_v = [](double, double) { return 0.0; };
    std::optional<Surface2D> grad_left_v;  // absent when f_v = 0
    std::optional<CurveSpec> curve;
    Rect box{0.0, 1.0, -4.0, 4.0};
    VariantFlags flags;
};

struct TermBreakdown {
    double lhs = 0.0;
    double term_dt = 0.0;
    double term_dx = 0.0;
    double term_lap = 0.0;
    double term_boundary = 0.0;
    double term_2d = 0.0;
    double term_curve = 0.0;
    double residual = 0.0;
    std::string variant;
    double horizon = 0.0;  // end of the (possibly stopped) interval
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;

    double normalized() const { return std::abs(residual) / (1.0 + std::abs(lhs)); }

    bool finite() const {
        for (double v : {lhs, term_dt, term_dx, term_lap, term_boundary, term_2d, term_curve, residual}) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

/// Bitwise equality of every numeric term.
inline bool same_terms(const TermBreakdown& a, const TermBreakdown& b) {
    auto bits = [](const TermBreakdown& t) {
        return std::vector<double>{t.lhs, t.term_dt, t.term_dx, t.term_lap, t.term_boundary, t.term_2d, t.term_curve, t.residual};
    };
    const auto x = bits(a), y = bits(b);
    return std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

/// residual = lhs - (dt + dx + lap + boundary - 2d + curve), in that order.
inline void assemble(TermBreakdown& t) {
    t.residual = t.lhs - (((((t.term_dt + t.term_dx) + t.term_lap) + t.term_boundary) - t.term_2d) + t.term_curve);
}

/// int L_T(x) d_x G(T, x): exact Stieltjes sum of the bin-wise constant field
/// against the left-continuous G over the level partition.
inline double boundary_term(const LocalTimeField& L, const Surface2D& G) {
    const auto& lv = L.levels();
    const double T = L.grid().horizon;
    double total = 0.0;
    for (std::size_t j = 0; j < lv.count; ++j) {
        const double c = L.final(j);
        if (c == 0.0) continue;
        total += c * (G.eval_left(T, lv.level(j + 1)) - G.eval_left(T, lv.level(j)));
    }
    return total;
}

/// int int L_s(x) d_{s,x} G(s, x) as the lower-left Stieltjes sum on
/// (time grid x level grid). Between visits L is constant in time, so each
/// run of constant L telescopes to two column differences of G.
inline double area_term(const LocalTimeField& L, const Surface2D& G) {
    const auto& lv = L.levels();
    const auto& tg = L.grid();
    const std::size_t n = tg.n_steps;
    double total = 0.0;
    for (std::size_t j = 0; j < lv.count; ++j) {
        const auto ev = L.events(j);
        if (ev.empty()) continue;
        const double a0 = lv.level(j), a1 = lv.level(j + 1);
        auto column = [&](std::size_t k) {
            const double s = tg.t(k);
            return G.eval_left(s, a1) - G.eval_left(s, a0);
        };
        double d_start = column(ev[0].step + 1);
        for (std::size_t e = 0; e < ev.size(); ++e) {
            const std::size_t next = e + 1 < ev.size() ? ev[e + 1].step + 1 : n;
            const double d_end = column(next);
            total += ev[e].cumulative * (d_end - d_start);
            d_start = d_end;
        }
    }
    return total;
}

namespace detail {

/// lhs, dt, dx and lap terms along the path.
inline void path_terms(const FunctionSpec& fs, const SemimartingalePath& p, TermBreakdown& t) {
    const std::size_t n = p.steps();
    const double dt = p.grid.dt();
    t.lhs = fs.f(p.grid.t(n), p.x[n]) - fs.f(0.0, p.x[0]);
    double sdt = 0.0, sdx = 0.0, slap = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double s = p.grid.t(k);
        const double x = p.x[k];
        sdt += fs.dt_left(s, x) * dt;
        sdx += fs.grad_left(s, x) * (p.x[k + 1] - x);
        const double dq = p.qv[k + 1] - p.qv[k];
        if (dq != 0.0) slap += fs.lap_left_h(s, x) * dq;
    }
    t.term_dt = sdt;
    t.term_dx = sdx;
    t.term_lap = 0.5 * slap;
    t.horizon = p.grid.horizon;
    t.n_steps = n;
    t.seed = p.seed;
    t.path_index = p.path_index;
}

}  // namespace detail

/// f(T, X_T) - f(0, X_0) against the dt, dX, Laplacian and local-time terms,
/// with + boundary and - two-parameter signs.
inline TermBreakdown eval_semimartingale(const FunctionSpec& fs, const SemimartingalePath& path,
                                         const LevelGrid& levels) {
    TermBreakdown t;
    t.variant = "semimartingale";
    detail::path_terms(fs, path, t);
    if (fs.grad_left_v) {
        const LocalTimeField L = local_time_occupation(path, levels);
        t.term_boundary = boundary_term(L, *fs.grad_left_v);
        t.term_2d = area_term(L, *fs.grad_left_v);
    }
    assemble(t);
    return t;
}

inline TermBreakdown eval_semimartingale(const FunctionSpec& fs, const SemimartingalePath& path,
                                         const LevelPolicy& policy = {}) {
    return eval_semimartingale(fs, path, policy.grid_for(path));
}

/// Curve variants, with L* the local time of X* = X - l on `levels`.
inline TermBreakdown eval_curve(const FunctionSpec& fs, const SemimartingalePath& path, const LevelGrid& levels) {
    if (!fs.curve) throw std::invalid_argument("eval_curve: function spec '" + fs.name + "' has no curve");
    const CurveSpec& cs = *fs.curve;
    TermBreakdown t;
    detail::path_terms(fs, path, t);
    const SemimartingalePath shifted = shift_by_curve(path, cs.l);
    const LocalTimeField L = local_time_occupation(shifted, levels);
    if (cs.form == CurveForm::shifted) {
        t.variant = "curve-shifted";
        if (fs.grad_left_v) {
            t.term_boundary = boundary_term(L, cs.shifted_grad_left_v);
            t.term_2d = area_term(L, cs.shifted_grad_left_v);
        }
    } else {
        t.variant = "curve-jump";
        const auto j0 = levels.bin_of(0.0);
        if (j0 >= 0) {
            const auto series = L.series(static_cast<std::size_t>(j0));
            std::vector<double> phi(path.steps());
            for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = cs.jump(path.grid.t(k));
            t.term_curve = dt_stieltjes(phi, series);
        }
    }
    assemble(t);
    return t;
}

inline TermBreakdown eval_curve(const FunctionSpec& fs, const SemimartingalePath& path,
                                const LevelPolicy& policy = {}) {
    if (!fs.curve) throw std::invalid_argument("eval_curve: function spec '" + fs.name + "' has no curve");
    return eval_curve(fs, path, policy.grid_for(shift_by_curve(path, fs.curve->l)));
}

/// The semimartingale identity on [0, T ^ tau_N] for an Ito-process path.
/// If X starts outside (-N, N) the interval is empty and every term is zero.
inline TermBreakdown eval_ito_process(const FunctionSpec& fs, const SemimartingalePath& path, double exit_level,
                                      const LevelPolicy& policy = {}) {
    const std::size_t tau = first_exit(path, exit_level);
    TermBreakdown t;
    if (tau == 0) {
        t.variant = "ito-process";
        t.seed = path.seed;
        t.path_index = path.path_index;
        return t;
    }
    const bool stopped = tau < path.steps();
    const SemimartingalePath p = stopped ? path.prefix(tau) : path;
    // level spacing follows the full path's time step
    LevelPolicy fixed = policy;
    fixed.delta = policy.resolve(path.grid);
    t = eval_semimartingale(fs, p, fixed);
    t.variant = "ito-process";
    return t;
}

struct KrylovReport {
    double lhs = 0.0;  // E int_0^{t ^ tau_N} |f(r, X_r)| dr
    stats::Interval lhs_ci;
    double rhs = 0.0;  // (int_0^t int_{-N}^{N} f^2)^(1/2)
    double ratio = 0.0;
    bool degenerate = false;      // 0/0
    bool inconsistent = false;    // rhs == 0 < lhs
    double exit_level = 0.0;
    double horizon = 0.0;
    double delta = 0.0;
    double bound = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
};

struct KrylovOptions {
    std::size_t n_steps = std::size_t{1} << 12;
    std::uint64_t seed = 1;
    std::vector<double> x_breaks;  // discontinuities of f in x for the quadrature
    double quad_tol = 1e-10;
    unsigned workers = worker_count();
};

inline KrylovReport krylov_check(const Fn2& f, const ItoProcessSpec& spec, double exit_level, double horizon,
                                 std::size_t n_paths, const KrylovOptions& opt = {}) {
    if (!(exit_level > 0.0)) throw std::invalid_argument("krylov_check: N must be > 0");
    if (n_paths == 0) throw std::invalid_argument("krylov_check: need at least one path");
    spec.validate({0.0, horizon, -exit_level, exit_level});
    const TimeGrid grid{horizon, opt.n_steps};
    grid.validate();
    std::vector<double> per_path(n_paths);
    parallel_for(
        n_paths,
        [&](std::size_t i) {
            const auto p = simulate_ito(spec, grid, opt.seed, i);
            const std::size_t tau = first_exit(p, exit_level);
            double s = 0.0;
            for (std::size_t k = 0; k < tau; ++k) s += std::abs(f(grid.t(k), p.x[k]));
            per_path[i] = s * grid.dt();
        },
        opt.workers);
    KrylovReport r;
    r.lhs = stats::mean(per_path);
    r.lhs_ci = stats::normal_ci(per_path);
    const double sq = quad::integrate_2d([&](double s, double x) { return f(s, x) * f(s, x); }, 0.0, horizon,
                                         -exit_level, exit_level, opt.quad_tol, {}, opt.x_breaks);
    r.rhs = std::sqrt(std::max(sq, 0.0));
    r.degenerate = r.lhs == 0.0 && r.rhs == 0.0;
    r.inconsistent = r.rhs == 0.0 && r.lhs > 0.0;
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : (r.degenerate ? 0.0 : std::numeric_limits<double>::infinity());
    r.exit_level = exit_level;
    r.horizon = horizon;
    r.delta = spec.delta;
    r.bound = spec.bound;
    r.n_paths = n_paths;
    r.n_steps = opt.n_steps;
    return r;
}

enum class Variant { semimartingale, curve, ito_process };

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::semimartingale: return "semimartingale";
        case Variant::curve: return "curve";
        case Variant::ito_process: return "ito_process";
    }
    return "?";
}

struct ConvergenceLevel {
    std::size_t n_steps = 0;
    double delta = 0.0;            // level spacing used
    double mean_normalized = 0.0;  // mean of |res| / (1 + |lhs|)
    stats::Interval ci;            // bootstrap CI of that mean
    double mean_abs = 0.0;         // mean of |res|
    std::vector<TermBreakdown> paths;
};

struct ConvergenceTable {
    std::vector<ConvergenceLevel> levels;
    double slope = 0.0;  // log-log slope of mean_normalized against dt
};

struct ConvergenceOptions {
    double horizon = 1.0;
    std::uint64_t seed = 1;
    LevelPolicy levels;
    std::optional<ItoProcessSpec> process;  // Brownian motion when absent
    double exit_level = 10.0;               // ito_process only
    bool keep_paths = false;
    unsigned workers = worker_count();
};

inline TermBreakdown evaluate(const FunctionSpec& fs, Variant v, const SemimartingalePath& p,
                              const ConvergenceOptions& opt) {
    switch (v) {
        case Variant::semimartingale: return eval_semimartingale(fs, p, opt.levels);
        case Variant::curve: return eval_curve(fs, p, opt.levels);
        case Variant::ito_process: return eval_ito_process(fs, p, opt.exit_level, opt.levels);
    }
    throw std::invalid_argument("evaluate: unknown variant");
}

/// Mean normalized residual at n_steps = 2^k for each k in `log2_steps`.
inline ConvergenceTable residual_convergence(const FunctionSpec& fs, Variant v, const std::vector<int>& log2_steps,
                                             std::size_t n_paths, const ConvergenceOptions& opt = {}) {
    if (n_paths == 0) throw std::invalid_argument("residual_convergence: need at least one path");
    ConvergenceTable table;
    std::vector<double> dts, means;
    for (int k : log2_steps) {
        if (k < 1 || k > 30) throw std::invalid_argument("residual_convergence: log2 steps out of range");
        const TimeGrid grid{opt.horizon, std::size_t{1} << k};
        std::vector<TermBreakdown> out(n_paths);
        parallel_for(
            n_paths,
            [&](std::size_t i) {
                const auto p = opt.process ? simulate_ito(*opt.process, grid, opt.seed, i)
                                           : simulate_bm(grid, opt.seed, i);
                out[i] = evaluate(fs, v, p, opt);
            },
            opt.workers);
        ConvergenceLevel lvl;
        lvl.n_steps = grid.n_steps;
        lvl.delta = opt.levels.resolve(grid);
        std::vector<double> norm(n_paths), abs_res(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i) {
            norm[i] = out[i].normalized();
            abs_res[i] = std::abs(out[i].residual);
        }
        lvl.mean_normalized = stats::mean(norm);
        lvl.ci = stats::bootstrap_ci(norm, 1000, opt.seed);
        lvl.mean_abs = stats::mean(abs_res);
        if (opt.keep_paths) lvl.paths = std::move(out);
        dts.push_back(grid.dt());
        means.push_back(lvl.mean_normalized);
        table.levels.push_back(std::move(lvl));
    }
    bool positive = true;
    for (double m : means) positive = positive && m > 0.0;
    table.slope = (means.size() >= 2 && positive) ? stats::loglog_slope(dts, means)
                                                   : std::numeric_limits<double>::quiet_NaN();
    return table;
}

}  // namespace itolt
