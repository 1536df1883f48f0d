#pragma once

// Experiment configuration: JSON (schema in docs/config.schema.json) with
// line-level diagnostics for syntax and schema errors.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace itolt::harness {

using nlohmann::json;

enum class Kind { formula_check, occupation, krylov, variation, mollifier_report, convergence };

inline const std::vector<std::pair<std::string, Kind>>& kind_names() {
    static const std::vector<std::pair<std::string, Kind>> k{{"formula-check", Kind::formula_check},
                                                             {"occupation", Kind::occupation},
                                                             {"krylov", Kind::krylov},
                                                             {"variation", Kind::variation},
                                                             {"mollifier-report", Kind::mollifier_report},
                                                             {"convergence", Kind::convergence}};
    return k;
}

inline std::string to_string(Kind k) {
    for (const auto& [name, kind] : kind_names()) {
        if (kind == k) return name;
    }
    return "?";
}

/// Malformed configuration; line is 1-based (0 when unknown).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& msg)
        : std::runtime_error(line ? "config line " + std::to_string(line) + ": " + msg : "config: " + msg),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct ProcessConfig {
    bool brownian = true;
    double sigma = 1.0;
    double drift = 0.0;
    double x0 = 0.0;
    double delta = 1.0;
    double bound = 1.0;  // K
};

struct ExperimentConfig {
    Kind kind = Kind::formula_check;
    std::string function = "tanaka";
    double curve_amplitude = 0.2;
    std::string curve_form = "jump";
    std::string variant = "semimartingale";
    ProcessConfig process;
    double horizon = 1.0;
    std::size_t n_steps = std::size_t{1} << 14;
    std::vector<int> log2_steps{12, 14, 16};
    std::optional<double> level_delta;
    double level_factor = 2.0;
    double level_offset = 0.5;
    std::size_t n_paths = 256;
    std::uint64_t seed = 7;
    double exit_level = 10.0;
    std::string integrand = "square";  // occupation: g(s, x)
    std::vector<std::string> krylov_family{"one", "square", "sin-pi", "indicator-positive"};
    std::optional<std::vector<double>> box;  // s_lo, s_hi, x_lo, x_hi
    std::optional<std::string> grid_file;
    std::optional<double> variation_tol;
    std::size_t max_cells = std::size_t{1} << 24;
    std::vector<int> mollifier_ns{1, 2, 4, 8, 16, 32, 64};
    std::vector<std::pair<double, double>> mollifier_points{{0.5, 0.25}, {0.75, -0.3}};
    int quadrature_order = 64;
    std::size_t field_stride = 64;
    bool write_fields = false;
    json tolerances = json::object();
    std::string output = "out";
    std::string format = "csv";
    json raw = json::object();

    double tolerance(const std::string& name, double fallback) const {
        return tolerances.contains(name) ? tolerances.at(name).get<double>() : fallback;
    }
};

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n')) + 1;
}

/// Line of the first occurrence of "key": in the raw text, or 0.
inline std::size_t line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

class Reader {
public:
    Reader(const json& j, const std::string& text) : j_(j), text_(text) {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError(line_of_key(text_, key), "'" + key + "': " + msg);
    }

    template <class T>
    bool get(const char* key, T& out) const {
        if (!j_.contains(key)) return false;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            fail(key, std::string("wrong type (") + j_.at(key).type_name() + ")");
        }
        return true;
    }

    double positive(const char* key, double current) const {
        double v = current;
        if (get(key, v) && !(v > 0.0)) fail(key, "must be > 0");
        return v;
    }

    std::size_t count(const char* key, std::size_t current) const {
        if (!j_.contains(key)) return current;
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 1) fail(key, "must be a positive integer");
        return v.get<std::size_t>();
    }

private:
    const json& j_;
    const std::string& text_;
};

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> k{
        "kind",        "function",     "curve",          "variant",         "process",       "horizon",
        "n_steps",     "log2_steps",   "level_delta",    "level_factor",    "level_offset",  "n_paths",
        "seed",        "exit_level",   "integrand",      "krylov_family",   "box",           "grid_file",
        "variation_tol", "max_cells",  "mollifier",      "field_stride",    "write_fields",  "tolerances",
        "output",      "format",       "description"};
    return k;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0), "syntax error: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ConfigError(1, "top level must be an object");
    for (const auto& [key, _] : j.items()) {
        const auto& k = detail::known_keys();
        if (std::find(k.begin(), k.end(), key) == k.end()) {
            throw ConfigError(detail::line_of_key(text, key), "unknown key '" + key + "'");
        }
    }
    const detail::Reader r(j, text);
    ExperimentConfig c;
    c.raw = j;

    std::string kind;
    if (!r.get("kind", kind)) throw ConfigError(1, "missing required key 'kind'");
    bool found = false;
    for (const auto& [name, k] : kind_names()) {
        if (name == kind) {
            c.kind = k;
            found = true;
        }
    }
    if (!found) r.fail("kind", "unknown experiment kind '" + kind + "'");

    r.get("function", c.function);
    if (j.contains("curve")) {
        const auto& cv = j.at("curve");
        if (!cv.is_object()) r.fail("curve", "must be an object");
        const detail::Reader cr(cv, text);
        cr.get("amplitude", c.curve_amplitude);
        cr.get("form", c.curve_form);
        if (c.curve_form != "jump" && c.curve_form != "shifted") cr.fail("form", "must be 'jump' or 'shifted'");
    }
    r.get("variant", c.variant);
    if (c.variant != "semimartingale" && c.variant != "curve" && c.variant != "ito_process") {
        r.fail("variant", "must be one of semimartingale, curve, ito_process");
    }
    if (j.contains("process")) {
        const auto& pv = j.at("process");
        if (!pv.is_object()) r.fail("process", "must be an object");
        const detail::Reader pr(pv, text);
        std::string type = "brownian";
        pr.get("type", type);
        if (type != "brownian" && type != "ito") pr.fail("type", "must be 'brownian' or 'ito'");
        c.process.brownian = type == "brownian";
        pr.get("sigma", c.process.sigma);
        pr.get("drift", c.process.drift);
        pr.get("x0", c.process.x0);
        c.process.delta = pr.positive("delta", c.process.delta);
        c.process.bound = pr.positive("K", c.process.bound);
    }
    c.horizon = r.positive("horizon", c.horizon);
    c.n_steps = r.count("n_steps", c.n_steps);
    if (r.get("log2_steps", c.log2_steps)) {
        if (c.log2_steps.empty()) r.fail("log2_steps", "must not be empty");
        for (int k : c.log2_steps) {
            if (k < 1 || k > 24) r.fail("log2_steps", "entries must be in [1, 24]");
        }
    }
    if (j.contains("level_delta")) c.level_delta = r.positive("level_delta", 1.0);
    c.level_factor = r.positive("level_factor", c.level_factor);
    r.get("level_offset", c.level_offset);
    c.n_paths = r.count("n_paths", c.n_paths);
    r.get("seed", c.seed);
    c.exit_level = r.positive("exit_level", c.exit_level);
    r.get("integrand", c.integrand);
    r.get("krylov_family", c.krylov_family);
    if (j.contains("box")) {
        std::vector<double> b;
        r.get("box", b);
        if (b.size() != 4 || !(b[1] >= b[0]) || !(b[3] >= b[2])) {
            r.fail("box", "must be [s_lo, s_hi, x_lo, x_hi] with s_hi >= s_lo and x_hi >= x_lo");
        }
        c.box = b;
    }
    if (j.contains("grid_file")) {
        std::string g;
        r.get("grid_file", g);
        c.grid_file = g;
    }
    if (j.contains("variation_tol")) c.variation_tol = r.positive("variation_tol", 1.0);
    c.max_cells = r.count("max_cells", c.max_cells);
    if (j.contains("mollifier")) {
        const auto& mv = j.at("mollifier");
        if (!mv.is_object()) r.fail("mollifier", "must be an object");
        const detail::Reader mr(mv, text);
        if (mr.get("ns", c.mollifier_ns)) {
            for (int n : c.mollifier_ns) {
                if (n < 1) mr.fail("ns", "entries must be >= 1");
            }
        }
        std::vector<std::vector<double>> pts;
        if (mr.get("points", pts)) {
            c.mollifier_points.clear();
            for (const auto& p : pts) {
                if (p.size() != 2) mr.fail("points", "each point must be [s, x]");
                c.mollifier_points.emplace_back(p[0], p[1]);
            }
        }
        mr.get("order", c.quadrature_order);
        if (c.quadrature_order < 2) mr.fail("order", "must be >= 2");
    }
    c.field_stride = r.count("field_stride", c.field_stride);
    r.get("write_fields", c.write_fields);
    if (j.contains("tolerances")) {
        c.tolerances = j.at("tolerances");
        if (!c.tolerances.is_object()) r.fail("tolerances", "must be an object");
        for (const auto& [name, v] : c.tolerances.items()) {
            if (!v.is_number() || !(v.get<double>() > 0.0)) {
                throw ConfigError(detail::line_of_key(text, name), "tolerance '" + name + "' must be a positive number");
            }
        }
    }
    r.get("output", c.output);
    r.get("format", c.format);
    if (c.format != "csv" && c.format != "json") r.fail("format", "must be 'csv' or 'json'");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace itolt::harness
