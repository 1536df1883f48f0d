#pragma once

// Two-parameter bounded-variation calculus: rectangle increments, Vitali
// variation over refined partitions, Jordan decomposition into increasing
// surfaces, and Lebesgue-Stieltjes sums/integrals in one and two variables.
//
// Conventions used throughout:
//   * the measure of a half-open cell [s1,s2) x [x1,x2) is the rectangle
//     increment of the left-continuous version of f (eval_left at corners);
//   * Stieltjes sums evaluate the integrand at the lower-left corner.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace itolt {

struct Rect {
    double s_lo = 0.0;
    double s_hi = 0.0;
    double x_lo = 0.0;
    double x_hi = 0.0;

    void validate() const {
        if (!(s_hi >= s_lo) || !(x_hi >= x_lo)) {
            throw std::invalid_argument("Rect: need s_hi >= s_lo and x_hi >= x_lo");
        }
    }
};

/// Coordinates where a surface may jump; partitions always include them.
struct JumpSet {
    std::vector<double> s_lines;
    std::vector<double> x_lines;
};

namespace detail {

inline std::vector<double> merge_points(double lo, double hi, std::size_t cells,
                                        const std::vector<double>& extra) {
    std::vector<double> pts;
    pts.reserve(cells + 1 + extra.size());
    const double width = hi - lo;
    for (std::size_t i = 0; i <= cells; ++i) {
        pts.push_back(i == cells ? hi : lo + width * static_cast<double>(i) / static_cast<double>(cells));
    }
    for (double e : extra) {
        if (e > lo && e < hi) pts.push_back(e);
    }
    std::sort(pts.begin(), pts.end());
    // drop duplicates and slivers narrower than roundoff
    const double eps = 1e-13 * std::max(1.0, std::abs(width));
    std::vector<double> out;
    out.reserve(pts.size());
    for (double p : pts) {
        if (out.empty() || p - out.back() > eps) {
            out.push_back(p);
        } else if (p == hi) {
            out.back() = hi;
        }
    }
    return out;
}

inline bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] > v[i - 1])) return false;
    }
    return true;
}

}  // namespace detail

struct Partition2D {
    std::vector<double> s_points;
    std::vector<double> x_points;

    /// 2^level cells per axis, augmented with the jump lines inside `r`.
    static Partition2D dyadic(const Rect& r, int level, const JumpSet& jumps = {}) {
        r.validate();
        const std::size_t cells = std::size_t{1} << level;
        return {detail::merge_points(r.s_lo, r.s_hi, cells, jumps.s_lines),
                detail::merge_points(r.x_lo, r.x_hi, cells, jumps.x_lines)};
    }

    static Partition2D uniform(const Rect& r, std::size_t s_cells, std::size_t x_cells) {
        r.validate();
        return {detail::merge_points(r.s_lo, r.s_hi, s_cells, {}),
                detail::merge_points(r.x_lo, r.x_hi, x_cells, {})};
    }

    std::size_t cells() const {
        if (s_points.size() < 2 || x_points.size() < 2) return 0;
        return (s_points.size() - 1) * (x_points.size() - 1);
    }

    Rect rect() const { return {s_points.front(), s_points.back(), x_points.front(), x_points.back()}; }

    void validate() const {
        if (s_points.size() < 2 || x_points.size() < 2) {
            throw std::invalid_argument("Partition2D: need at least two points per axis");
        }
        if (!detail::strictly_increasing(s_points) || !detail::strictly_increasing(x_points)) {
            throw std::invalid_argument("Partition2D: coordinates must be strictly increasing");
        }
    }
};

enum class SurfaceKind { analytic, grid_sampled };

/// Node values of a grid-sampled surface, row-major with s as the row index.
struct GridData {
    std::vector<double> s_nodes;
    std::vector<double> x_nodes;
    std::vector<double> values;

    double at(std::size_t i, std::size_t j) const { return values[i * x_nodes.size() + j]; }

    void validate() const {
        if (s_nodes.empty() || x_nodes.empty()) throw std::invalid_argument("GridData: empty axis");
        if (values.size() != s_nodes.size() * x_nodes.size()) {
            throw std::invalid_argument("GridData: value count does not match s_count * x_count");
        }
        if (!detail::strictly_increasing(s_nodes) || !detail::strictly_increasing(x_nodes)) {
            throw std::invalid_argument("GridData: nodes must be strictly increasing");
        }
    }
};

/// A real function of (s, x) with its left-continuous version.
///
/// Analytic surfaces may supply eval_left directly; otherwise the left limit
/// is approximated on the diagonal, eval(s - h, x - h), with h = left_step().
/// Grid-sampled surfaces are left-continuous step functions: the value on
/// (s_{i-1}, s_i] x (x_{j-1}, x_j] is the node value at (s_i, x_j), clamped
/// outside the node range. For them eval_left == eval, and every node
/// coordinate counts as a jump line.
class Surface2D {
public:
    using Fn = std::function<double(double, double)>;

    static constexpr double kDefaultLeftStep = 1e-9;

    /// The zero surface.
    Surface2D() : eval_([](double, double) { return 0.0; }) {}

    static Surface2D analytic(Fn f, Fn left = {}, JumpSet jumps = {}, double left_step = kDefaultLeftStep) {
        Surface2D out;
        out.eval_ = std::move(f);
        out.left_ = std::move(left);
        out.jumps_ = std::move(jumps);
        out.kind_ = SurfaceKind::analytic;
        out.left_step_ = left_step;
        return out;
    }

    static Surface2D sampled(GridData data) {
        data.validate();
        auto grid = std::make_shared<const GridData>(std::move(data));
        Surface2D out;
        out.kind_ = SurfaceKind::grid_sampled;
        out.grid_ = grid;
        out.jumps_ = {grid->s_nodes, grid->x_nodes};
        out.eval_ = [grid](double s, double x) {
            auto pick = [](const std::vector<double>& nodes, double v) {
                auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
                if (it == nodes.end()) return nodes.size() - 1;
                return static_cast<std::size_t>(it - nodes.begin());
            };
            return grid->at(pick(grid->s_nodes, s), pick(grid->x_nodes, x));
        };
        out.left_ = out.eval_;
        return out;
    }

    double eval(double s, double x) const { return eval_(s, x); }
    double operator()(double s, double x) const { return eval_(s, x); }

    double eval_left(double s, double x) const {
        if (left_) return left_(s, x);
        return eval_(s - left_step_, x - left_step_);
    }

    SurfaceKind kind() const { return kind_; }
    const JumpSet& jumps() const { return jumps_; }
    bool has_analytic_left() const { return static_cast<bool>(left_); }
    double left_step() const { return left_step_; }
    const GridData* grid() const { return grid_.get(); }

    /// Tolerance used when a policy leaves it unset.
    double default_tolerance() const { return kind_ == SurfaceKind::analytic ? 1e-8 : 1e-4; }

private:
    Fn eval_;
    Fn left_;
    JumpSet jumps_;
    SurfaceKind kind_ = SurfaceKind::analytic;
    double left_step_ = kDefaultLeftStep;
    std::shared_ptr<const GridData> grid_;
};

/// Signed measure of the cell from the four (already left-limited) corners.
/// Grouped as a difference of differences so that functions of one variable
/// give exactly zero.
inline double cell_increment(double f_hi_hi, double f_hi_lo, double f_lo_hi, double f_lo_lo) {
    return (f_hi_hi - f_hi_lo) - (f_lo_hi - f_lo_lo);
}

inline double rect_increment(const Surface2D& f, const Rect& r) {
    r.validate();
    return cell_increment(f.eval_left(r.s_hi, r.x_hi), f.eval_left(r.s_hi, r.x_lo),
                          f.eval_left(r.s_lo, r.x_hi), f.eval_left(r.s_lo, r.x_lo));
}

/// Left-limited corner values of f on a partition (row-major, s outer).
inline std::vector<double> corner_values(const Surface2D& f, const Partition2D& p) {
    const std::size_t nx = p.x_points.size();
    std::vector<double> out(p.s_points.size() * nx);
    for (std::size_t i = 0; i < p.s_points.size(); ++i) {
        for (std::size_t j = 0; j < nx; ++j) out[i * nx + j] = f.eval_left(p.s_points[i], p.x_points[j]);
    }
    return out;
}

/// V_P(f): sum of absolute rectangle increments over the cells of p.
inline double variation_on(const Surface2D& f, const Partition2D& p) {
    p.validate();
    const std::size_t nx = p.x_points.size();
    std::vector<double> prev(nx), cur(nx);
    for (std::size_t j = 0; j < nx; ++j) prev[j] = f.eval_left(p.s_points[0], p.x_points[j]);
    double total = 0.0;
    for (std::size_t i = 1; i < p.s_points.size(); ++i) {
        for (std::size_t j = 0; j < nx; ++j) cur[j] = f.eval_left(p.s_points[i], p.x_points[j]);
        for (std::size_t j = 0; j + 1 < nx; ++j) {
            total += std::abs(cell_increment(cur[j + 1], cur[j], prev[j + 1], prev[j]));
        }
        std::swap(prev, cur);
    }
    return total;
}

/// Absolute cell increments on a fixed partition with 2D prefix sums, so the
/// variation over any grid-aligned sub-rectangle is an O(1) lookup.
class VariationGrid {
public:
    VariationGrid(const Surface2D& f, Partition2D p) : part_(std::move(p)) {
        part_.validate();
        const auto corners = corner_values(f, part_);
        build(corners);
    }

    /// From explicit node values (row-major, s outer) on p.
    VariationGrid(const std::vector<double>& nodes, Partition2D p) : part_(std::move(p)) {
        part_.validate();
        build(nodes);
    }

    const Partition2D& partition() const { return part_; }
    std::size_t s_cells() const { return part_.s_points.size() - 1; }
    std::size_t x_cells() const { return part_.x_points.size() - 1; }

    double increment(std::size_t i, std::size_t j) const { return inc_[i * x_cells() + j]; }

    /// Variation over cells [i0, i1) x [j0, j1).
    double over(std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1) const {
        const std::size_t w = x_cells() + 1;
        return (prefix_[i1 * w + j1] - prefix_[i1 * w + j0]) - (prefix_[i0 * w + j1] - prefix_[i0 * w + j0]);
    }

    double total() const { return over(0, s_cells(), 0, x_cells()); }

    /// Prefix value V over cells [0, i) x [0, j).
    double prefix(std::size_t i, std::size_t j) const { return prefix_[i * (x_cells() + 1) + j]; }

private:
    void build(const std::vector<double>& v) {
        const std::size_t ns = s_cells(), nx = x_cells(), w = nx + 1;
        if (v.size() != (ns + 1) * w) throw std::invalid_argument("VariationGrid: node count mismatch");
        inc_.assign(ns * nx, 0.0);
        prefix_.assign((ns + 1) * w, 0.0);
        for (std::size_t i = 0; i < ns; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < nx; ++j) {
                const double m = cell_increment(v[(i + 1) * w + j + 1], v[(i + 1) * w + j], v[i * w + j + 1], v[i * w + j]);
                inc_[i * nx + j] = m;
                row += std::abs(m);
                prefix_[(i + 1) * w + j + 1] = prefix_[i * w + j + 1] + row;
            }
        }
    }

    Partition2D part_;
    std::vector<double> inc_;
    std::vector<double> prefix_;
};

struct RefinementPolicy {
    /// NaN selects the surface's default (1e-8 analytic, 1e-4 grid-sampled).
    double tol = std::numeric_limits<double>::quiet_NaN();
    std::size_t max_cells = std::size_t{1} << 24;
    int start_level = 1;
};

struct VariationResult {
    double value = 0.0;
    std::vector<std::pair<std::size_t, double>> refinement_trace;  // (cells, V_P)
    bool converged = false;
    double tolerance = 0.0;
    int level = 0;  // dyadic level of the last partition evaluated
};

inline double resolve_tol(const RefinementPolicy& p, const Surface2D& f) {
    return std::isnan(p.tol) ? f.default_tolerance() : p.tol;
}

/// sup_P V_P(f) approximated along dyadic refinements that include the
/// declared jump lines; stops when two successive levels agree within tol.
inline VariationResult variation(const Surface2D& f, const Rect& r, const RefinementPolicy& policy = {}) {
    r.validate();
    VariationResult out;
    out.tolerance = resolve_tol(policy, f);
    if (r.s_hi == r.s_lo || r.x_hi == r.x_lo) {
        out.converged = true;
        return out;
    }
    for (int level = policy.start_level;; ++level) {
        const auto p = Partition2D::dyadic(r, level, f.jumps());
        if (p.cells() > policy.max_cells) break;
        const double v = variation_on(f, p);
        out.refinement_trace.emplace_back(p.cells(), v);
        out.value = v;
        out.level = level;
        const auto n = out.refinement_trace.size();
        if (n >= 2 && std::abs(v - out.refinement_trace[n - 2].second) < out.tolerance) {
            out.converged = true;
            break;
        }
    }
    return out;
}

/// Variation of x -> f(s, x) on [a, b] (one-variable, sectional). Never
/// inferred from the two-parameter variation.
inline VariationResult sectional_variation(const Surface2D& f, double s, double a, double b,
                                           const RefinementPolicy& policy = {}) {
    if (!(b >= a)) throw std::invalid_argument("sectional_variation: need b >= a");
    VariationResult out;
    out.tolerance = resolve_tol(policy, f);
    if (a == b) {
        out.converged = true;
        return out;
    }
    for (int level = policy.start_level;; ++level) {
        const std::size_t cells = std::size_t{1} << level;
        if (cells > policy.max_cells) break;
        const auto pts = detail::merge_points(a, b, cells, f.jumps().x_lines);
        double v = 0.0;
        double prev = f.eval(s, pts[0]);
        for (std::size_t j = 1; j < pts.size(); ++j) {
            const double cur = f.eval(s, pts[j]);
            v += std::abs(cur - prev);
            prev = cur;
        }
        out.refinement_trace.emplace_back(pts.size() - 1, v);
        out.value = v;
        out.level = level;
        const auto n = out.refinement_trace.size();
        if (n >= 2 && std::abs(v - out.refinement_trace[n - 2].second) < out.tolerance) {
            out.converged = true;
            break;
        }
    }
    return out;
}

/// f = f1 - f2 on the quarter space {s >= base_s, x >= base_x}, with
/// 2 f1 = V_f([base_s, s] x [base_x, x]) + f and 2 f2 = V_f - f on a grid.
struct JordanPair {
    Surface2D f1;
    Surface2D f2;
    double base_s = 0.0;
    double base_x = 0.0;
    Partition2D grid;
    std::vector<double> f_nodes;   // regularized f on grid nodes
    std::vector<double> f1_nodes;
    std::vector<double> f2_nodes;
    bool converged = false;
};

struct JordanPolicy {
    RefinementPolicy variation;
    int max_level = 9;  // node grid is at most (2^max_level + 1)^2 plus jump lines
};

/// Jordan decomposition on the box [base_s, r.s_hi] x [base_x, r.x_hi].
///
/// Interior nodes use the left limit of f; nodes on the quarter-space
/// boundary (s == base_s or x == base_x) use f itself, since no points of the
/// quarter space lie below them.
inline JordanPair jordan_decompose(const Surface2D& f, double base_s, double base_x, const Rect& r,
                                   const JordanPolicy& policy = {}) {
    r.validate();
    if (r.s_lo < base_s || r.x_lo < base_x) {
        throw std::invalid_argument("jordan_decompose: rectangle must lie in the quarter space");
    }
    const Rect box{base_s, r.s_hi, base_x, r.x_hi};
    auto probe = policy.variation;
    const std::size_t side = std::size_t{1} << policy.max_level;
    probe.max_cells = std::min(probe.max_cells, (side + f.jumps().s_lines.size()) * (side + f.jumps().x_lines.size()));
    const auto var = variation(f, box, probe);

    JordanPair out;
    out.base_s = base_s;
    out.base_x = base_x;
    out.converged = var.converged;
    const int level = std::max(1, std::min(var.level, policy.max_level));
    out.grid = Partition2D::dyadic(box, level, f.jumps());

    const auto& sp = out.grid.s_points;
    const auto& xp = out.grid.x_points;
    const std::size_t ns = sp.size(), nx = xp.size();
    out.f_nodes.resize(ns * nx);
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < nx; ++j) {
            out.f_nodes[i * nx + j] = (i == 0 || j == 0) ? f.eval(sp[i], xp[j]) : f.eval_left(sp[i], xp[j]);
        }
    }
    const VariationGrid vg(out.f_nodes, out.grid);
    out.f1_nodes.resize(ns * nx);
    out.f2_nodes.resize(ns * nx);
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < nx; ++j) {
            const double v = vg.prefix(i, j);
            const double fv = out.f_nodes[i * nx + j];
            out.f1_nodes[i * nx + j] = 0.5 * (v + fv);
            out.f2_nodes[i * nx + j] = 0.5 * (v - fv);
        }
    }
    out.f1 = Surface2D::sampled({sp, xp, out.f1_nodes});
    out.f2 = Surface2D::sampled({sp, xp, out.f2_nodes});
    return out;
}

/// Smallest cell increment of node values on a grid; an increasing surface
/// has this >= 0 (up to the -1e-12 roundoff guard).
inline double min_cell_increment(const std::vector<double>& nodes, const Partition2D& p) {
    const std::size_t nx = p.x_points.size();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < p.s_points.size(); ++i) {
        for (std::size_t j = 0; j + 1 < nx; ++j) {
            lo = std::min(lo, cell_increment(nodes[(i + 1) * nx + j + 1], nodes[(i + 1) * nx + j],
                                             nodes[i * nx + j + 1], nodes[i * nx + j]));
        }
    }
    return lo;
}

/// Increments in [-1e-12, 0) are treated as roundoff and zeroed; anything
/// below that is a genuine violation of monotonicity.
inline constexpr double kNegativeIncrementGuard = -1e-12;

inline bool is_increasing(const std::vector<double>& nodes, const Partition2D& p) {
    return min_cell_increment(nodes, p) >= kNegativeIncrementGuard;
}

// ---------------------------------------------------------------------------
// Lebesgue-Stieltjes integration
// ---------------------------------------------------------------------------

using Integrand2D = std::function<double(double, double)>;
using Integrand1D = std::function<double(double)>;

/// Riemann-Stieltjes sum: sum over cells of g(lower-left) * cell measure.
inline double ls_sum_2d(const Integrand2D& g, const Surface2D& f, const Partition2D& p) {
    p.validate();
    const std::size_t nx = p.x_points.size();
    std::vector<double> prev(nx), cur(nx);
    for (std::size_t j = 0; j < nx; ++j) prev[j] = f.eval_left(p.s_points[0], p.x_points[j]);
    double total = 0.0;
    for (std::size_t i = 1; i < p.s_points.size(); ++i) {
        for (std::size_t j = 0; j < nx; ++j) cur[j] = f.eval_left(p.s_points[i], p.x_points[j]);
        for (std::size_t j = 0; j + 1 < nx; ++j) {
            const double mu = cell_increment(cur[j + 1], cur[j], prev[j + 1], prev[j]);
            if (mu != 0.0) total += g(p.s_points[i - 1], p.x_points[j]) * mu;
        }
        std::swap(prev, cur);
    }
    return total;
}

struct LsResult {
    double value = 0.0;
    double previous = 0.0;  // estimate one refinement earlier
    bool converged = false;
    int levels = 0;
};

namespace detail {

/// Romberg-style extrapolation of a sequence of Riemann-Stieltjes sums on
/// successively halved meshes. Corner sums have an error expansion in
/// powers of h, so the table eliminates h, h^2, ... in turn; for purely
/// atomic measures every entry equals the exact value.
template <class SumAt>
LsResult romberg(SumAt&& sum_at, int start_level, int max_level, double tol) {
    LsResult out;
    std::vector<double> prev_row;
    double prev_best = 0.0;
    for (int level = start_level; level <= max_level; ++level) {
        std::vector<double> row{sum_at(level)};
        for (std::size_t m = 1; m <= prev_row.size(); ++m) {
            const double factor = std::ldexp(1.0, static_cast<int>(m));
            row.push_back((factor * row[m - 1] - prev_row[m - 1]) / (factor - 1.0));
        }
        const double best = row.back();
        out.levels = level - start_level + 1;
        out.previous = prev_best;
        out.value = best;
        if (out.levels >= 3 && std::abs(best - prev_best) < tol) {
            out.converged = true;
            break;
        }
        prev_best = best;
        prev_row = std::move(row);
    }
    return out;
}

}  // namespace detail

/// Two-parameter Lebesgue-Stieltjes integral of g against the measure of f
/// on r: limit of lower-left corner sums over dyadic partitions (augmented
/// with f's jump lines), extrapolated across levels.
inline LsResult ls_integral_2d(const Integrand2D& g, const Surface2D& f, const Rect& r,
                               const RefinementPolicy& policy = {}) {
    r.validate();
    if (r.s_hi == r.s_lo || r.x_hi == r.x_lo) return {0.0, 0.0, true, 0};
    int max_level = policy.start_level;
    while ((std::size_t{1} << (2 * (max_level + 1))) <= policy.max_cells) ++max_level;
    return detail::romberg(
        [&](int level) { return ls_sum_2d(g, f, Partition2D::dyadic(r, level, f.jumps())); },
        std::max(1, policy.start_level), max_level, resolve_tol(policy, f));
}

/// One-variable function of bounded variation with its left-continuous version.
struct BvFunction1D {
    Integrand1D eval;
    Integrand1D eval_left;  // empty: eval(x - left_step)
    std::vector<double> jumps;
    double left_step = Surface2D::kDefaultLeftStep;

    double left(double x) const { return eval_left ? eval_left(x) : eval(x - left_step); }
};

/// sum_i g(x_i) * (h(x_{i+1}) - h(x_i)) with left-continuous h; a jump at a
/// node x contributes g(x) * (h(x+) - h(x)).
inline double ls_sum_1d(const Integrand1D& g, const BvFunction1D& h, const std::vector<double>& points) {
    if (points.size() < 2) return 0.0;
    double total = 0.0;
    double prev = h.left(points[0]);
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double cur = h.left(points[i]);
        const double mu = cur - prev;
        if (mu != 0.0) total += g(points[i - 1]) * mu;
        prev = cur;
    }
    return total;
}

inline LsResult ls_integral_1d(const Integrand1D& g, const BvFunction1D& h, double lo, double hi,
                               double tol = 1e-8, int max_level = 22) {
    if (!(hi >= lo)) throw std::invalid_argument("ls_integral_1d: need hi >= lo");
    if (hi == lo) return {0.0, 0.0, true, 0};
    return detail::romberg(
        [&](int level) { return ls_sum_1d(g, h, detail::merge_points(lo, hi, std::size_t{1} << level, h.jumps)); },
        2, max_level, tol);
}

}  // namespace itolt
