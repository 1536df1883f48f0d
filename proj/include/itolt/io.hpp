#pragma once

// CSV and JSON emitters for paths, local-time fields and term breakdowns.

#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include <json.hpp>

#include "itolt/itoformula.hpp"
#include "itolt/localtime.hpp"
#include "itolt/mollifier.hpp"
#include "itolt/pathsim.hpp"

namespace itolt::io {

using nlohmann::json;

inline std::ostream& full_precision(std::ostream& out) {
    return out << std::setprecision(std::numeric_limits<double>::max_digits10);
}

/// Columns t, X, M, V, qv; one row per grid point.
inline void write_path_csv(std::ostream& out, const SemimartingalePath& p) {
    full_precision(out) << "t,X,M,V,qv\n";
    for (std::size_t k = 0; k < p.x.size(); ++k) {
        out << p.grid.t(k) << ',' << p.x[k] << ',' << p.m[k] << ',' << p.v[k] << ',' << p.qv[k] << '\n';
    }
}

inline json path_sidecar(const SemimartingalePath& p, const std::string& process = "brownian") {
    return {{"process", process},     {"seed", p.seed},        {"path_index", p.path_index},
            {"rng", p.rng_id},        {"x0", p.x0},            {"horizon", p.grid.horizon},
            {"n_steps", p.grid.n_steps}};
}

inline json field_header(const LocalTimeField& L, std::size_t stride) {
    const auto& lv = L.levels();
    return {{"convention", L.convention()},
            {"delta", lv.delta},
            {"epsilon", L.epsilon()},
            {"level_offset", lv.offset},
            {"level_min", lv.level(0)},
            {"level_max", lv.level(lv.count - 1)},
            {"levels", lv.count},
            {"horizon", L.grid().horizon},
            {"n_steps", L.grid().n_steps},
            {"time_stride", stride},
            {"seed", L.seed},
            {"path_index", L.path_index}};
}

/// Dense matrix: rows t_k for k = 0, stride, 2*stride, ..., n (the last row
/// is always included); first column t, then one column per level a_j.
inline void write_field_csv(std::ostream& out, const LocalTimeField& L, std::size_t stride = 1) {
    if (stride == 0) stride = 1;
    const auto& lv = L.levels();
    const std::size_t n = L.steps();
    std::vector<std::vector<double>> cols(lv.count);
    for (std::size_t j = 0; j < lv.count; ++j) cols[j] = L.series(j);
    full_precision(out) << "t";
    for (std::size_t j = 0; j < lv.count; ++j) out << ',' << lv.level(j);
    out << '\n';
    auto row = [&](std::size_t k) {
        out << L.grid().t(k);
        for (std::size_t j = 0; j < lv.count; ++j) out << ',' << cols[j][k];
        out << '\n';
    };
    std::size_t k = 0;
    for (; k < n; k += stride) row(k);
    row(n);
}

inline json to_json(const TermBreakdown& t) {
    return {{"variant", t.variant},       {"lhs", t.lhs},
            {"term_dt", t.term_dt},       {"term_dx", t.term_dx},
            {"term_lap", t.term_lap},     {"term_boundary", t.term_boundary},
            {"term_2d", t.term_2d},       {"term_curve", t.term_curve},
            {"residual", t.residual},     {"normalized_residual", t.normalized()},
            {"horizon", t.horizon},       {"n_steps", t.n_steps},
            {"seed", t.seed},             {"path_index", t.path_index}};
}

inline constexpr const char* kTermCsvHeader =
    "path_index,n_steps,horizon,lhs,term_dt,term_dx,term_lap,term_boundary,term_2d,term_curve,residual,normalized";

inline void write_term_row(std::ostream& out, const TermBreakdown& t) {
    full_precision(out) << t.path_index << ',' << t.n_steps << ',' << t.horizon << ',' << t.lhs << ',' << t.term_dt
                        << ',' << t.term_dx << ',' << t.term_lap << ',' << t.term_boundary << ',' << t.term_2d << ','
                        << t.term_curve << ',' << t.residual << ',' << t.normalized() << '\n';
}

inline json to_json(const KrylovReport& r) {
    return {{"lhs", r.lhs},
            {"lhs_ci", {r.lhs_ci.lo, r.lhs_ci.hi}},
            {"rhs", r.rhs},
            {"ratio", r.ratio},
            {"degenerate", r.degenerate},
            {"inconsistent", r.inconsistent},
            {"N", r.exit_level},
            {"t", r.horizon},
            {"delta", r.delta},
            {"K", r.bound},
            {"n_paths", r.n_paths},
            {"n_steps", r.n_steps}};
}

inline void write_mollifier_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
    full_precision(out) << "s,x,n,err_f,err_dt,err_dx,boundary_affected\n";
    for (const auto& r : rows) {
        out << r.s << ',' << r.x << ',' << r.n << ',' << r.err_f << ',' << r.err_dt << ',' << r.err_dx << ','
            << (r.boundary_affected ? 1 : 0) << '\n';
    }
}

}  // namespace itolt::io
