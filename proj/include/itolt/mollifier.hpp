#pragma once

// Bump-kernel mollification f_n(s, x) = int int rho(tau) rho(z) f(s -+ tau/n, x -+ z/n)
// on (0,2)^2, with even reflection f(tau, y) = f(-tau, y) for tau < 0.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "itolt/bv2d.hpp"
#include "itolt/quadrature.hpp"

namespace itolt {

namespace detail {

inline double bump_shape(double x) {
    if (!(x > 0.0 && x < 2.0)) return 0.0;
    const double u = x - 1.0;
    const double d = u * u - 1.0;
    if (!(d < 0.0)) return 0.0;  // u * u can round to 1 next to the endpoints
    return std::exp(1.0 / d);
}

/// d/dx of bump_shape.
inline double bump_shape_prime(double x) {
    if (!(x > 0.0 && x < 2.0)) return 0.0;
    const double u = x - 1.0;
    const double d = u * u - 1.0;
    if (!(d < 0.0)) return 0.0;
    return std::exp(1.0 / d) * (-2.0 * u) / (d * d);
}

}  // namespace detail

/// c = 1 / int_0^2 exp(1/((x-1)^2 - 1)) dx, computed once.
inline double bump_normalization() {
    static const double c = 1.0 / quad::integrate(detail::bump_shape, 0.0, 2.0, 1e-14, {1.0});
    return c;
}

inline double bump(double x) { return bump_normalization() * detail::bump_shape(x); }
inline double bump_prime(double x) { return bump_normalization() * detail::bump_shape_prime(x); }

/// left: arguments shifted by -z/n (samples below the point); right: +z/n.
enum class Direction { left, right };

inline const char* to_string(Direction d) { return d == Direction::left ? "left" : "right"; }

struct MollifierSpec {
    int n = 1;
    Direction direction_t = Direction::left;
    Direction direction_x = Direction::left;
    double c = bump_normalization();
    int order = 64;  // Gauss-Legendre points per axis on (0, 2)

    void validate() const {
        if (n < 1) throw std::invalid_argument("MollifierSpec: n must be >= 1");
        if (order < 2) throw std::invalid_argument("MollifierSpec: quadrature order must be >= 2");
        if (!(c > 0.0)) throw std::invalid_argument("MollifierSpec: c must be > 0");
    }
};

/// Discrete kernel on (0,2): nodes z_i with weights w_i rho(z_i) (rescaled
/// to unit mass) and w_i rho'(z_i) (adjusted so that sum = 0 and
/// sum z_i w_i rho'(z_i) = -1, the exact moments of rho').
struct KernelRule {
    std::vector<double> nodes;
    std::vector<double> mass;
    std::vector<double> slope;

    static KernelRule make(int order, double c) {
        const auto gl = quad::gauss_legendre(order, 0.0, 2.0);
        KernelRule k;
        double total = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            k.nodes.push_back(gl.nodes[i]);
            k.mass.push_back(gl.weights[i] * c * detail::bump_shape(gl.nodes[i]));
            k.slope.push_back(gl.weights[i] * c * detail::bump_shape_prime(gl.nodes[i]));
            total += k.mass.back();
        }
        for (double& m : k.mass) m /= total;
        double drift = 0.0;
        for (double v : k.slope) drift += v;
        double moment = 0.0;
        for (std::size_t i = 0; i < k.slope.size(); ++i) {
            k.slope[i] -= drift * k.mass[i];
            moment += k.slope[i] * k.nodes[i];
        }
        for (double& v : k.slope) v *= -1.0 / moment;
        return k;
    }
};

class SmoothedSurface {
public:
    SmoothedSurface(Surface2D f, MollifierSpec spec) : f_(std::move(f)), spec_(spec) {
        spec_.validate();
        kernel_ = KernelRule::make(spec_.order, spec_.c);
    }

    const MollifierSpec& spec() const { return spec_; }
    const Surface2D& underlying() const { return f_; }

    double value(double s, double x) const { return apply(s, x, false, false); }
    /// d/ds f_n, with the derivative moved onto the kernel.
    double dt(double s, double x) const { return apply(s, x, true, false); }
    /// d/dx f_n, with the derivative moved onto the kernel.
    double dx(double s, double x) const { return apply(s, x, false, true); }

private:
    double reflected(double s, double x) const { return f_.eval(s < 0.0 ? -s : s, x); }

    double apply(double s, double x, bool d_time, bool d_space) const {
        const double n = spec_.n;
        const double st = spec_.direction_t == Direction::left ? -1.0 : 1.0;
        const double sx = spec_.direction_x == Direction::left ? -1.0 : 1.0;
        const auto& wt = d_time ? kernel_.slope : kernel_.mass;
        const auto& wx = d_space ? kernel_.slope : kernel_.mass;
        double total = 0.0;
        for (std::size_t a = 0; a < kernel_.nodes.size(); ++a) {
            const double sa = s + st * kernel_.nodes[a] / n;
            double row = 0.0;
            for (std::size_t b = 0; b < kernel_.nodes.size(); ++b) {
                row += wx[b] * reflected(sa, x + sx * kernel_.nodes[b] / n);
            }
            total += wt[a] * row;
        }
        // d/ds f(s - tau/n) against rho(tau) gives n * int rho'(tau) f(s - tau/n);
        // the right-shifted version flips the sign.
        if (d_time) total *= -st * n;
        if (d_space) total *= -sx * n;
        if (!std::isfinite(total)) {
            throw std::runtime_error("mollify: non-finite quadrature at (" + std::to_string(s) + ", " +
                                     std::to_string(x) + ")");
        }
        return total;
    }

    Surface2D f_;
    MollifierSpec spec_;
    KernelRule kernel_;
};

inline SmoothedSurface mollify(const Surface2D& f, const MollifierSpec& spec) { return SmoothedSurface(f, spec); }

struct ConvergenceRow {
    double s = 0.0;
    double x = 0.0;
    int n = 1;
    double err_f = 0.0;
    double err_dt = 0.0;
    double err_dx = 0.0;
    bool boundary_affected = false;  // s within 2/n of 0
};

/// Pointwise errors of f_n, d_t f_n and d_x f_n against the reference f,
/// left time derivative and left gradient, for every (point, n).
inline std::vector<ConvergenceRow> convergence_report(const Surface2D& f, const std::function<double(double, double)>& dt_ref,
                                                      const std::function<double(double, double)>& dx_ref,
                                                      const std::vector<int>& ns,
                                                      const std::vector<std::pair<double, double>>& points,
                                                      MollifierSpec base = {}) {
    std::vector<ConvergenceRow> rows;
    for (const auto& [s, x] : points) {
        for (int n : ns) {
            base.n = n;
            const SmoothedSurface fn(f, base);
            ConvergenceRow r;
            r.s = s;
            r.x = x;
            r.n = n;
            r.err_f = std::abs(fn.value(s, x) - f.eval(s, x));
            r.err_dt = std::abs(fn.dt(s, x) - dt_ref(s, x));
            r.err_dx = std::abs(fn.dx(s, x) - dx_ref(s, x));
            r.boundary_affected = s < 2.0 / n;
            rows.push_back(r);
        }
    }
    return rows;
}

}  // namespace itolt
