#pragma once

// Experiment dispatch: builds inputs from an ExperimentConfig, runs the
// batch, writes CSV/JSON into the output directory and returns a verdicted
// report.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "itolt/bv2d.hpp"
#include "itolt/grid_file.hpp"
#include "itolt/harness/builtins.hpp"
#include "itolt/harness/config.hpp"
#include "itolt/io.hpp"
#include "itolt/itoformula.hpp"
#include "itolt/localtime.hpp"
#include "itolt/mollifier.hpp"
#include "itolt/parallel.hpp"
#include "itolt/pathsim.hpp"
#include "itolt/stats.hpp"

namespace itolt::harness {

struct Metric {
    std::string name;
    double value = 0.0;
    std::string comparator;  // "<=", ">=" or "=="
    double tolerance = 0.0;
    bool pass = false;
};

inline Metric metric(std::string name, double value, std::string cmp, double tol) {
    bool ok = false;
    if (cmp == "<=") ok = value <= tol;
    else if (cmp == ">=") ok = value >= tol;
    else ok = value == tol;
    return {std::move(name), value, std::move(cmp), tol, ok && !std::isnan(value)};
}

struct Report {
    json config;
    std::vector<Metric> metrics;
    json data = json::object();
    std::vector<std::string> files;
    double wall_seconds = 0.0;

    bool pass() const {
        for (const auto& m : metrics) {
            if (!m.pass) return false;
        }
        return true;
    }

    json to_json() const {
        json ms = json::array();
        for (const auto& m : metrics) {
            ms.push_back({{"name", m.name},
                          {"value", m.value},
                          {"comparator", m.comparator},
                          {"tolerance", m.tolerance},
                          {"verdict", m.pass ? "pass" : "fail"}});
        }
        return {{"config", config},     {"metrics", ms},           {"pass", pass()},
                {"data", data},         {"files", files},          {"rng", std::string(kRngId)},
                {"workers_env", kWorkersEnv}, {"wall_clock_seconds", wall_seconds}};
    }
};

namespace detail {

inline FunctionSpec function_for(const ExperimentConfig& c) {
    builtins::Params p;
    p.curve_amplitude = c.curve_amplitude;
    p.curve_form = c.curve_form == "shifted" ? CurveForm::shifted : CurveForm::jump;
    FunctionSpec fs = builtins::builtin(c.function, p);
    if (c.box) fs.box = {(*c.box)[0], (*c.box)[1], (*c.box)[2], (*c.box)[3]};
    return fs;
}

inline ItoProcessSpec process_for(const ExperimentConfig& c) {
    ItoProcessSpec s;
    const double sig = c.process.sigma, b = c.process.drift;
    s.sigma = [sig](double, double) { return sig; };
    s.drift = [b](double, double) { return b; };
    s.x0 = c.process.x0;
    s.delta = c.process.delta;
    s.bound = c.process.bound;
    s.description = "sigma=" + std::to_string(sig) + ", b=" + std::to_string(b);
    return s;
}

inline LevelPolicy levels_for(const ExperimentConfig& c) {
    LevelPolicy p;
    if (c.level_delta) p.delta = *c.level_delta;
    p.factor = c.level_factor;
    p.offset = c.level_offset;
    return p;
}

inline SemimartingalePath simulate(const ExperimentConfig& c, const TimeGrid& g, std::size_t i) {
    if (c.process.brownian) return simulate_bm(g, c.seed, i, c.process.x0);
    return simulate_ito(process_for(c), g, c.seed, i);
}

inline Variant variant_for(const ExperimentConfig& c) {
    if (c.variant == "curve") return Variant::curve;
    if (c.variant == "ito_process") return Variant::ito_process;
    return Variant::semimartingale;
}

class Output {
public:
    Output(const std::string& dir, Report& rep) : dir_(dir), rep_(rep) { std::filesystem::create_directories(dir_); }

    std::ofstream open(const std::string& name) {
        const auto path = dir_ / name;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        rep_.files.push_back(path.string());
        return out;
    }

    void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

private:
    std::filesystem::path dir_;
    Report& rep_;
};

inline void run_formula_check(const ExperimentConfig& c, Report& rep, Output& out) {
    const FunctionSpec fs = function_for(c);
    const Variant v = variant_for(c);
    if (v == Variant::curve && !fs.curve) throw std::invalid_argument("function '" + fs.name + "' has no curve");
    if (!c.process.brownian) process_for(c).validate({0.0, c.horizon, -c.exit_level, c.exit_level});
    const TimeGrid grid{c.horizon, c.n_steps};
    grid.validate();
    ConvergenceOptions opt;
    opt.levels = levels_for(c);
    opt.exit_level = c.exit_level;
    std::vector<TermBreakdown> terms(c.n_paths);
    parallel_for(c.n_paths, [&](std::size_t i) { terms[i] = evaluate(fs, v, simulate(c, grid, i), opt); });
    std::vector<double> norm;
    std::size_t non_finite = 0;
    for (const auto& t : terms) {
        norm.push_back(t.normalized());
        if (!t.finite()) ++non_finite;
    }
    const auto ci = stats::bootstrap_ci(norm, 1000, c.seed);
    rep.metrics.push_back(metric("mean_normalized_residual", stats::mean(norm), "<=",
                                 c.tolerance("mean_normalized_residual", 0.1)));
    rep.metrics.push_back(metric("non_finite_paths", static_cast<double>(non_finite), "==", 0.0));
    rep.data["mean_normalized_residual_ci"] = {ci.lo, ci.hi};
    rep.data["level_delta"] = opt.levels.resolve(grid);
    if (c.format == "json") {
        json arr = json::array();
        for (const auto& t : terms) arr.push_back(io::to_json(t));
        out.write_json("terms.json", arr);
    } else {
        auto f = out.open("terms.csv");
        f << io::kTermCsvHeader << '\n';
        for (const auto& t : terms) io::write_term_row(f, t);
    }
    if (c.write_fields && c.n_paths > 0) {
        const auto p = simulate(c, grid, 0);
        const auto L = local_time_occupation(p, opt.levels);
        auto f = out.open("field_path0.csv");
        io::write_field_csv(f, L, c.field_stride);
        out.write_json("field_path0.json", io::field_header(L, c.field_stride));
        auto pf = out.open("path0.csv");
        io::write_path_csv(pf, p);
        out.write_json("path0.json", io::path_sidecar(p, c.process.brownian ? "brownian" : "ito"));
    }
}

inline std::function<double(double, double)> integrand_for(const std::string& name) {
    if (name == "one") return [](double, double) { return 1.0; };
    if (name == "square") return [](double, double x) { return x * x; };
    if (name == "cos") return [](double, double x) { return std::cos(x); };
    if (name == "time-weighted") return [](double s, double x) { return s * std::exp(-x * x); };
    throw std::invalid_argument("unknown integrand '" + name + "' (known: one, square, cos, time-weighted)");
}

inline void run_occupation(const ExperimentConfig& c, Report& rep, Output& out) {
    const auto g = integrand_for(c.integrand);
    const TimeGrid grid{c.horizon, c.n_steps};
    grid.validate();
    const LevelPolicy policy = levels_for(c);
    struct Row {
        OccupationCheck occ;
        double l0_occupation = 0.0;
        double l0_tanaka = 0.0;
    };
    std::vector<Row> rows(c.n_paths);
    parallel_for(c.n_paths, [&](std::size_t i) {
        const auto p = simulate(c, grid, i);
        const auto levels = policy.grid_for(p);
        rows[i].occ = occupation_check(g, p, levels);
        const auto L = local_time_occupation(p, levels);
        rows[i].l0_occupation = L.value_at_level(p.steps(), 0.0);
        rows[i].l0_tanaka = local_time_tanaka(p, 0.0).back();
    });
    const double rel_tol = c.tolerance("relative_error", 0.02);
    std::size_t within = 0;
    std::vector<double> l0, diff;
    for (const auto& r : rows) {
        if (r.occ.rel_err <= rel_tol) ++within;
        l0.push_back(r.l0_occupation);
        diff.push_back(std::abs(r.l0_occupation - r.l0_tanaka));
    }
    rep.metrics.push_back(metric("fraction_within_relative_error",
                                 static_cast<double>(within) / static_cast<double>(c.n_paths), ">=",
                                 c.tolerance("fraction", 0.95)));
    rep.data["relative_error_tolerance"] = rel_tol;
    rep.data["mean_local_time_at_0"] = stats::mean(l0);
    rep.data["mean_abs_estimator_difference_at_0"] = stats::mean(diff);
    if (c.process.brownian && c.process.x0 == 0.0) {
        const double target = std::sqrt(c.horizon / (2.0 * std::numbers::pi));
        rep.data["local_time_at_0_target"] = target;
        rep.metrics.push_back(metric("local_time_calibration_error", std::abs(stats::mean(l0) - target), "<=",
                                     c.tolerance("local_time_calibration", 0.02)));
    }
    rep.metrics.push_back(
        metric("estimator_agreement", stats::mean(diff), "<=", c.tolerance("estimator_agreement", 0.05)));
    if (c.format == "json") {
        json arr = json::array();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            arr.push_back({{"path_index", i},
                           {"lhs", rows[i].occ.lhs},
                           {"rhs", rows[i].occ.rhs},
                           {"rel_err", rows[i].occ.rel_err},
                           {"L_T_0_occupation", rows[i].l0_occupation},
                           {"L_T_0_tanaka", rows[i].l0_tanaka}});
        }
        out.write_json("occupation.json", arr);
    } else {
        auto f = out.open("occupation.csv");
        io::full_precision(f) << "path_index,lhs,rhs,rel_err,L_T_0_occupation,L_T_0_tanaka\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            f << i << ',' << rows[i].occ.lhs << ',' << rows[i].occ.rhs << ',' << rows[i].occ.rel_err << ','
              << rows[i].l0_occupation << ',' << rows[i].l0_tanaka << '\n';
        }
    }
}

struct KrylovMember {
    std::string name;
    std::function<double(double, double)> f;
    std::vector<double> x_breaks;
};

inline KrylovMember krylov_member(const std::string& name) {
    if (name == "one") return {name, [](double, double) { return 1.0; }, {}};
    if (name == "square") return {name, [](double, double x) { return x * x; }, {}};
    if (name == "sin-pi") return {name, [](double, double x) { return std::sin(std::numbers::pi * x); }, {}};
    if (name == "indicator-positive") return {name, [](double, double x) { return x > 0.0 ? 1.0 : 0.0; }, {0.0}};
    if (name == "zero") return {name, [](double, double) { return 0.0; }, {}};
    throw std::invalid_argument("unknown krylov family member '" + name +
                                "' (known: one, square, sin-pi, indicator-positive, zero)");
}

inline void run_krylov(const ExperimentConfig& c, Report& rep, Output& out) {
    const ItoProcessSpec spec = process_for(c);
    std::vector<double> sups;
    std::size_t non_finite = 0;
    json table = json::array();
    for (int k : c.log2_steps) {
        double sup = 0.0;
        for (const auto& name : c.krylov_family) {
            const auto m = krylov_member(name);
            KrylovOptions opt;
            opt.n_steps = std::size_t{1} << k;
            opt.seed = c.seed;
            opt.x_breaks = m.x_breaks;
            const auto r = krylov_check(m.f, spec, c.exit_level, c.horizon, c.n_paths, opt);
            if (!std::isfinite(r.ratio)) ++non_finite;
            if (!r.degenerate) sup = std::max(sup, r.ratio);
            if (name == "one") {
                rep.metrics.push_back(metric("one_lhs_ci_low_minus_t_at_2^" + std::to_string(k),
                                             r.lhs_ci.lo - c.horizon, "<=", 0.0));
            }
            auto j = io::to_json(r);
            j["function"] = name;
            j["log2_steps"] = k;
            table.push_back(j);
        }
        sups.push_back(sup);
    }
    rep.metrics.push_back(metric("non_finite_ratios", static_cast<double>(non_finite), "==", 0.0));
    if (sups.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(sups.begin(), sups.end());
        rep.metrics.push_back(
            metric("sup_ratio_relative_spread", (*hi - *lo) / *hi, "<=", c.tolerance("sup_ratio_spread", 0.1)));
    }
    rep.data["sup_ratio_by_level"] = sups;
    if (c.format == "json") {
        out.write_json("krylov.json", table);
    } else {
        auto f = out.open("krylov.csv");
        io::full_precision(f) << "log2_steps,function,lhs,lhs_ci_lo,lhs_ci_hi,rhs,ratio,degenerate,inconsistent\n";
        for (const auto& r : table) {
            f << r["log2_steps"].get<int>() << ',' << r["function"].get<std::string>() << ','
              << r["lhs"].get<double>() << ',' << r["lhs_ci"][0].get<double>() << ',' << r["lhs_ci"][1].get<double>()
              << ',' << r["rhs"].get<double>() << ',' << r["ratio"].get<double>() << ','
              << r["degenerate"].get<bool>() << ',' << r["inconsistent"].get<bool>() << '\n';
        }
    }
}

inline void run_variation(const ExperimentConfig& c, Report& rep, Output& out) {
    Surface2D surface;
    Rect box;
    if (c.grid_file) {
        surface = load_grid_surface(*c.grid_file);
        const auto* g = surface.grid();
        box = {g->s_nodes.front(), g->s_nodes.back(), g->x_nodes.front(), g->x_nodes.back()};
        rep.data["surface"] = *c.grid_file;
    } else {
        const FunctionSpec fs = function_for(c);
        surface = fs.grad_left_v ? *fs.grad_left_v : Surface2D::analytic(fs.grad_left);
        box = fs.box;
        rep.data["surface"] = "grad_left_v of " + fs.name;
    }
    if (c.box) box = {(*c.box)[0], (*c.box)[1], (*c.box)[2], (*c.box)[3]};
    RefinementPolicy policy;
    if (c.variation_tol) policy.tol = *c.variation_tol;
    policy.max_cells = c.max_cells;
    const auto v = variation(surface, box, policy);
    rep.data["variation"] = v.value;
    rep.data["tolerance"] = v.tolerance;
    rep.data["box"] = {box.s_lo, box.s_hi, box.x_lo, box.x_hi};
    rep.metrics.push_back(metric("converged", v.converged ? 1.0 : 0.0, "==", 1.0));
    rep.metrics.push_back(metric("variation_finite", std::isfinite(v.value) ? 1.0 : 0.0, "==", 1.0));
    if (c.format == "json") {
        json arr = json::array();
        for (const auto& [cells, val] : v.refinement_trace) arr.push_back({{"cells", cells}, {"variation", val}});
        out.write_json("variation.json", arr);
    } else {
        auto f = out.open("variation.csv");
        io::full_precision(f) << "cells,variation\n";
        for (const auto& [cells, val] : v.refinement_trace) f << cells << ',' << val << '\n';
    }
}

inline void run_mollifier(const ExperimentConfig& c, Report& rep, Output& out) {
    const FunctionSpec fs = function_for(c);
    MollifierSpec base;
    base.order = c.quadrature_order;
    const auto rows = convergence_report(Surface2D::analytic(fs.f), fs.dt_left, fs.grad_left, c.mollifier_ns,
                                         c.mollifier_points, base);
    double ef = 0.0, edt = 0.0, edx = 0.0;
    std::size_t not_decreasing = 0;
    const std::size_t per_point = c.mollifier_ns.size();
    for (std::size_t p = 0; p < c.mollifier_points.size(); ++p) {
        const auto& first = rows[p * per_point];
        const auto& last = rows[p * per_point + per_point - 1];
        ef = std::max(ef, last.err_f);
        edx = std::max(edx, last.err_dx);
        if (!last.boundary_affected) edt = std::max(edt, last.err_dt);
        if (per_point >= 2 && (last.err_f > first.err_f || last.err_dx > first.err_dx)) ++not_decreasing;
    }
    rep.metrics.push_back(metric("max_err_f_at_largest_n", ef, "<=", c.tolerance("err_f", 0.1)));
    rep.metrics.push_back(metric("max_err_dx_at_largest_n", edx, "<=", c.tolerance("err_dx", 0.1)));
    rep.metrics.push_back(metric("max_err_dt_at_largest_n", edt, "<=", c.tolerance("err_dt", 0.1)));
    rep.metrics.push_back(metric("points_not_improving", static_cast<double>(not_decreasing), "==", 0.0));
    rep.data["c"] = base.c;
    rep.data["order"] = base.order;
    if (c.format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            arr.push_back({{"s", r.s},
                           {"x", r.x},
                           {"n", r.n},
                           {"err_f", r.err_f},
                           {"err_dt", r.err_dt},
                           {"err_dx", r.err_dx},
                           {"boundary_affected", r.boundary_affected}});
        }
        out.write_json("mollifier.json", arr);
    } else {
        auto f = out.open("mollifier.csv");
        io::write_mollifier_csv(f, rows);
    }
}

inline void run_convergence(const ExperimentConfig& c, Report& rep, Output& out) {
    const FunctionSpec fs = function_for(c);
    ConvergenceOptions opt;
    opt.horizon = c.horizon;
    opt.seed = c.seed;
    opt.levels = levels_for(c);
    opt.exit_level = c.exit_level;
    if (!c.process.brownian) opt.process = process_for(c);
    const auto table = residual_convergence(fs, variant_for(c), c.log2_steps, c.n_paths, opt);
    std::size_t violations = 0;
    for (std::size_t i = 1; i < table.levels.size(); ++i) {
        if (!(table.levels[i].mean_abs < table.levels[i - 1].mean_abs)) ++violations;
    }
    rep.metrics.push_back(metric("final_mean_normalized_residual", table.levels.back().mean_normalized, "<=",
                                 c.tolerance("mean_normalized_residual", 0.1)));
    rep.metrics.push_back(metric("decrease_violations", static_cast<double>(violations), "==", 0.0));
    rep.data["slope"] = table.slope;
    if (c.format == "json") {
        json arr = json::array();
        for (const auto& l : table.levels) {
            arr.push_back({{"n_steps", l.n_steps},
                           {"delta", l.delta},
                           {"mean_normalized", l.mean_normalized},
                           {"ci", {l.ci.lo, l.ci.hi}},
                           {"mean_abs", l.mean_abs}});
        }
        out.write_json("convergence.json", arr);
    } else {
        auto f = out.open("convergence.csv");
        io::full_precision(f) << "n_steps,delta,mean_normalized,ci_lo,ci_hi,mean_abs\n";
        for (const auto& l : table.levels) {
            f << l.n_steps << ',' << l.delta << ',' << l.mean_normalized << ',' << l.ci.lo << ',' << l.ci.hi << ','
              << l.mean_abs << '\n';
        }
    }
}

}  // namespace detail

/// Runs the experiment, writes its outputs plus report.json into
/// config.output and returns the report.
inline Report run(const ExperimentConfig& c) {
    const auto start = std::chrono::steady_clock::now();
    Report rep;
    rep.config = c.raw;
    rep.config["kind"] = to_string(c.kind);
    rep.config["seed"] = c.seed;
    rep.config["n_paths"] = c.n_paths;
    rep.config["n_steps"] = c.n_steps;
    rep.config["output"] = c.output;
    rep.config["format"] = c.format;
    detail::Output out(c.output, rep);
    switch (c.kind) {
        case Kind::formula_check: detail::run_formula_check(c, rep, out); break;
        case Kind::occupation: detail::run_occupation(c, rep, out); break;
        case Kind::krylov: detail::run_krylov(c, rep, out); break;
        case Kind::variation: detail::run_variation(c, rep, out); break;
        case Kind::mollifier_report: detail::run_mollifier(c, rep, out); break;
        case Kind::convergence: detail::run_convergence(c, rep, out); break;
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto path = std::filesystem::path(c.output) / "report.json";
    std::ofstream(path) << rep.to_json().dump(2) << '\n';
    return rep;
}

}  // namespace itolt::harness
