#pragma once

// Built-in function specs: |x|, x^2, the two sin-product examples with
// gradient jumps on integer lines, a kink along a curve, and a smooth
// space-time harmonic.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "itolt/bv2d.hpp"
#include "itolt/itoformula.hpp"

namespace itolt::builtins {

inline constexpr double kPi = std::numbers::pi;

struct Params {
    double curve_amplitude = 0.2;  // curve-kink: l(t) = A sin t
    CurveForm curve_form = CurveForm::jump;
};

inline const std::vector<std::string>& names() {
    static const std::vector<std::string> n{"tanaka",      "square",     "paper-example-1",
                                            "paper-example-2", "curve-kink", "heat-smooth"};
    return n;
}

namespace detail {

/// Sign of sin(pi u) just below u: +1 on (2i, 2i+1], -1 on (2i+1, 2i+2].
inline double sin_sign_left(double u) {
    const double r = u - 2.0 * std::floor(u / 2.0);
    return (r > 0.0 && r <= 1.0) ? 1.0 : -1.0;
}

/// Exact sign of sin(pi u): 0 on the integers, where the floating-point sine
/// is off by about 1e-16.
inline double sin_sign(double u) {
    const double r = u - 2.0 * std::floor(u / 2.0);
    if (r == 0.0 || r == 1.0) return 0.0;
    return r < 1.0 ? 1.0 : -1.0;
}

inline JumpSet integer_lines(int lo, int hi) {
    JumpSet j;
    for (int i = lo; i <= hi; ++i) {
        j.s_lines.push_back(i);
        j.x_lines.push_back(i);
    }
    return j;
}

inline double on_support(double t, double x) { return sin_sign(t) * sin_sign(x) > 0.0 ? 1.0 : 0.0; }

inline double on_support_left(double t, double x) { return sin_sign_left(t) * sin_sign_left(x) > 0.0 ? 1.0 : 0.0; }

}  // namespace detail

inline FunctionSpec tanaka() {
    FunctionSpec s;
    s.name = "tanaka";
    s.f = [](double, double x) { return std::abs(x); };
    s.dt_left = [](double, double) { return 0.0; };
    s.grad_left = [](double, double x) { return sgn_left(x); };
    s.f_v = s.f;
    auto g = [](double, double x) { return sgn_left(x); };
    s.grad_left_v = Surface2D::analytic(g, g, JumpSet{{}, {0.0}});
    s.box = {0.0, 1.0, -4.0, 4.0};
    return s;
}

inline FunctionSpec square() {
    FunctionSpec s;
    s.name = "square";
    s.f = [](double, double x) { return x * x; };
    s.dt_left = [](double, double) { return 0.0; };
    s.grad_left = [](double, double x) { return 2.0 * x; };
    s.f_h = s.f;
    s.lap_left_h = [](double, double) { return 2.0; };
    s.box = {0.0, 1.0, -4.0, 4.0};
    return s;
}

/// f = (sin pi x sin pi t)^+. The gradient surface evaluates the displayed
/// formula; its left limit uses the indicator on (2j, 2j+1] in each variable.
inline FunctionSpec paper_example_1() {
    using detail::on_support;
    FunctionSpec s;
    s.name = "paper-example-1";
    s.f = [](double t, double x) { return std::max(std::sin(kPi * x) * std::sin(kPi * t), 0.0); };
    s.dt_left = [](double t, double x) { return kPi * std::cos(kPi * t) * std::sin(kPi * x) * on_support(t, x); };
    s.grad_left = [](double t, double x) { return kPi * std::cos(kPi * x) * std::sin(kPi * t) * on_support(t, x); };
    s.f_v = s.f;
    auto left = [](double t, double x) {
        return kPi * std::cos(kPi * x) * std::sin(kPi * t) * detail::on_support_left(t, x);
    };
    s.grad_left_v = Surface2D::analytic(s.grad_left, left, detail::integer_lines(-64, 64));
    s.box = {0.0, 2.0, 0.0, 2.0};
    return s;
}

/// f = (sin pi x)^(1/3) (sin pi x sin pi t)^+, whose gradient
/// (4/3) pi cos(pi x) (sin pi x)^(1/3) sin(pi t) on the support is continuous.
inline FunctionSpec paper_example_2() {
    using detail::on_support;
    FunctionSpec s;
    s.name = "paper-example-2";
    s.f = [](double t, double x) {
        const double sx = std::sin(kPi * x);
        return std::cbrt(sx) * std::max(sx * std::sin(kPi * t), 0.0);
    };
    s.dt_left = [](double t, double x) {
        const double sx = std::sin(kPi * x);
        return kPi * std::cbrt(sx) * sx * std::cos(kPi * t) * on_support(t, x);
    };
    s.grad_left = [](double t, double x) {
        const double sx = std::sin(kPi * x);
        return (4.0 / 3.0) * kPi * std::cos(kPi * x) * std::cbrt(sx) * std::sin(kPi * t) * on_support(t, x);
    };
    s.f_v = s.f;
    s.grad_left_v = Surface2D::analytic(s.grad_left, s.grad_left, detail::integer_lines(-64, 64));
    s.box = {0.0, 2.0, 0.0, 2.0};
    return s;
}

/// f = (x - l(t))^+ with l(t) = A sin t. Both curve forms are populated:
/// the unshifted gradient 1{x > l(t)} and the shifted one 1{y > 0}.
inline FunctionSpec curve_kink(double amplitude = 0.2, CurveForm form = CurveForm::jump) {
    FunctionSpec s;
    s.name = "curve-kink";
    auto l = [amplitude](double t) { return amplitude * std::sin(t); };
    auto dl = [amplitude](double t) { return amplitude * std::cos(t); };
    s.f = [l](double t, double x) { return std::max(x - l(t), 0.0); };
    s.dt_left = [l, dl](double t, double x) { return x > l(t) ? -dl(t) : 0.0; };
    s.grad_left = [l](double t, double x) { return x > l(t) ? 1.0 : 0.0; };
    s.f_v = s.f;
    s.grad_left_v = Surface2D::analytic(s.grad_left, s.grad_left);
    CurveSpec c;
    c.l = Curve{l, "l(t)=" + std::to_string(amplitude) + "*sin(t)"};
    c.form = form;
    c.jump = [](double) { return 1.0; };
    auto step = [](double, double y) { return y > 0.0 ? 1.0 : 0.0; };
    c.shifted_grad_left_v = Surface2D::analytic(step, step, JumpSet{{}, {0.0}});
    s.curve = c;
    s.flags.curve = true;
    s.box = {0.0, 1.0, -4.0, 4.0};
    return s;
}

/// f = exp(t/2) cos x, so d_t f + f''/2 = 0.
inline FunctionSpec heat_smooth() {
    FunctionSpec s;
    s.name = "heat-smooth";
    s.f = [](double t, double x) { return std::exp(0.5 * t) * std::cos(x); };
    s.dt_left = [](double t, double x) { return 0.5 * std::exp(0.5 * t) * std::cos(x); };
    s.grad_left = [](double t, double x) { return -std::exp(0.5 * t) * std::sin(x); };
    s.f_h = s.f;
    s.lap_left_h = [](double t, double x) { return -std::exp(0.5 * t) * std::cos(x); };
    s.box = {0.0, 1.0, -4.0, 4.0};
    return s;
}

inline FunctionSpec builtin(const std::string& name, const Params& p = {}) {
    if (name == "tanaka") return tanaka();
    if (name == "square") return square();
    if (name == "paper-example-1") return paper_example_1();
    if (name == "paper-example-2") return paper_example_2();
    if (name == "curve-kink") return curve_kink(p.curve_amplitude, p.curve_form);
    if (name == "heat-smooth") return heat_smooth();
    std::string known;
    for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown builtin '" + name + "' (known: " + known + ")");
}

}  // namespace itolt::builtins
