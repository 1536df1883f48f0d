#pragma once

// Finite-difference and variation diagnostics for a FunctionSpec.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "itolt/bv2d.hpp"
#include "itolt/itoformula.hpp"

namespace itolt {

struct Diagnostic {
    std::string check;
    double s = 0.0;
    double x = 0.0;
    std::string detail;
};

struct SpecCheckOptions {
    std::size_t s_samples = 9;
    std::size_t x_samples = 17;
    double h = 1e-6;           // left difference step
    double fd_tol = 1e-4;      // relative to 1 + |derivative|
    double split_tol = 1e-10;  // f = f_h + f_v
    double jump_clearance = 1e-4;
    /// Finiteness check only, so a loose stopping tolerance suffices.
    RefinementPolicy variation{1e-3};
};

struct SpecCheckReport {
    std::vector<Diagnostic> failures;
    std::size_t points_checked = 0;
    std::size_t points_skipped = 0;  // too close to a declared jump line or the curve
    double variation = 0.0;          // of grad_left_v on the box
    bool variation_converged = true;
    double sectional_variation_t0 = 0.0;  // of x -> grad_left_v(0, x)
    bool sectional_converged = true;
    double sup_t0 = 0.0;  // max |grad_left_v(0, x)| over the x samples

    bool ok() const { return failures.empty(); }
};

inline SpecCheckReport spec_check(const FunctionSpec& fs, const SpecCheckOptions& opt = {}) {
    SpecCheckReport rep;
    const Rect& box = fs.box;
    box.validate();
    auto near_jump = [&](double s, double x) {
        if (fs.grad_left_v) {
            for (double v : fs.grad_left_v->jumps().s_lines) {
                if (std::abs(s - v) < opt.jump_clearance) return true;
            }
            for (double v : fs.grad_left_v->jumps().x_lines) {
                if (std::abs(x - v) < opt.jump_clearance) return true;
            }
        }
        if (fs.curve && std::abs(x - fs.curve->l(s)) < opt.jump_clearance) return true;
        return false;
    };
    auto fail = [&](const std::string& check, double s, double x, double got, double want) {
        std::ostringstream d;
        d.precision(10);
        d << "got " << got << ", expected " << want;
        rep.failures.push_back({check, s, x, d.str()});
    };
    // interior sample points, offset from the box edges and integer lines
    for (std::size_t i = 0; i < opt.s_samples; ++i) {
        const double s = box.s_lo + (box.s_hi - box.s_lo) * (static_cast<double>(i) + 0.5 + 0.0123) /
                                        static_cast<double>(opt.s_samples);
        for (std::size_t j = 0; j < opt.x_samples; ++j) {
            const double x = box.x_lo + (box.x_hi - box.x_lo) * (static_cast<double>(j) + 0.5 + 0.0321) /
                                            static_cast<double>(opt.x_samples);
            const double f = fs.f(s, x);
            const double split = fs.f_h(s, x) + fs.f_v(s, x);
            if (std::abs(split - f) > opt.split_tol * (1.0 + std::abs(f))) fail("f = f_h + f_v", s, x, split, f);
            if (near_jump(s, x)) {
                ++rep.points_skipped;
                continue;
            }
            ++rep.points_checked;
            if (s - opt.h >= 0.0) {
                const double fd = (f - fs.f(s - opt.h, x)) / opt.h;
                const double d = fs.dt_left(s, x);
                if (std::abs(fd - d) > opt.fd_tol * (1.0 + std::abs(d))) fail("dt_left", s, x, d, fd);
            }
            const double fd = (f - fs.f(s, x - opt.h)) / opt.h;
            const double g = fs.grad_left(s, x);
            if (std::abs(fd - g) > opt.fd_tol * (1.0 + std::abs(g))) fail("grad_left", s, x, g, fd);
        }
    }
    // with a curve the BV hypothesis is on the shifted gradient (t, y) -> grad_left_v(t, y + l(t))
    const Surface2D* bv = fs.curve ? &fs.curve->shifted_grad_left_v : (fs.grad_left_v ? &*fs.grad_left_v : nullptr);
    if (bv) {
        const auto v = variation(*bv, box, opt.variation);
        rep.variation = v.value;
        rep.variation_converged = v.converged;
        if (!std::isfinite(v.value) || !v.converged) {
            rep.failures.push_back({"grad_left_v variation", box.s_lo, box.x_lo,
                                    "value " + std::to_string(v.value) + (v.converged ? "" : " (not converged)")});
        }
        for (std::size_t j = 0; j <= opt.x_samples; ++j) {
            const double x = box.x_lo + (box.x_hi - box.x_lo) * static_cast<double>(j) / static_cast<double>(opt.x_samples);
            rep.sup_t0 = std::max(rep.sup_t0, std::abs(bv->eval(box.s_lo, x)));
        }
        if (!std::isfinite(rep.sup_t0)) {
            rep.failures.push_back({"grad_left_v(0, .) bounded", box.s_lo, box.x_lo, "non-finite"});
        }
        const auto sv = sectional_variation(*bv, box.s_lo, box.x_lo, box.x_hi, opt.variation);
        rep.sectional_variation_t0 = sv.value;
        rep.sectional_converged = sv.converged;
        if (!std::isfinite(sv.value) || !sv.converged) {
            rep.failures.push_back({"grad_left_v(0, .) variation", box.s_lo, box.x_lo,
                                    "value " + std::to_string(sv.value) + (sv.converged ? "" : " (not converged)")});
        }
    }
    return rep;
}

}  // namespace itolt
