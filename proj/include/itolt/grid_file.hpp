#pragma once

// Plain-text grid surfaces (see docs/grid_format.md):
//
//   # optional comment lines
//   <s_count> <x_count>
//   <s_min> <s_max>
//   <x_min> <x_max>
//   <s_count * x_count values, row-major, s is the row index>
//
// Nodes are uniform on both axes; counts of 1 require min == max.

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "itolt/bv2d.hpp"

namespace itolt {

namespace detail {

inline std::vector<double> uniform_nodes(std::size_t count, double lo, double hi) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    if (count > 1) out.back() = hi;
    return out;
}

}  // namespace detail

inline GridData read_grid(std::istream& in) {
    std::stringstream body;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] == '#') continue;
        body << line << '\n';
    }
    std::size_t ns = 0, nx = 0;
    double s_lo = 0, s_hi = 0, x_lo = 0, x_hi = 0;
    if (!(body >> ns >> nx)) throw std::runtime_error("grid file: missing counts line");
    if (!(body >> s_lo >> s_hi)) throw std::runtime_error("grid file: missing s-range line");
    if (!(body >> x_lo >> x_hi)) throw std::runtime_error("grid file: missing x-range line");
    if (ns == 0 || nx == 0) throw std::runtime_error("grid file: counts must be positive");
    if ((ns > 1 && !(s_hi > s_lo)) || (nx > 1 && !(x_hi > x_lo))) {
        throw std::runtime_error("grid file: ranges must be increasing");
    }
    GridData g{detail::uniform_nodes(ns, s_lo, s_hi), detail::uniform_nodes(nx, x_lo, x_hi), {}};
    g.values.reserve(ns * nx);
    double v = 0.0;
    while (g.values.size() < ns * nx && body >> v) g.values.push_back(v);
    if (g.values.size() != ns * nx) {
        throw std::runtime_error("grid file: expected " + std::to_string(ns * nx) + " values, read " +
                                 std::to_string(g.values.size()));
    }
    if (body >> v) throw std::runtime_error("grid file: trailing values after grid body");
    return g;
}

inline Surface2D load_grid_surface(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grid file: " + path);
    return Surface2D::sampled(read_grid(in));
}

/// Writes a uniform grid; values are printed with round-trip precision.
inline void write_grid(std::ostream& out, const GridData& g) {
    out << g.s_nodes.size() << ' ' << g.x_nodes.size() << '\n'
        << std::setprecision(std::numeric_limits<double>::max_digits10) << g.s_nodes.front() << ' '
        << g.s_nodes.back() << '\n'
        << g.x_nodes.front() << ' ' << g.x_nodes.back() << '\n';
    for (std::size_t i = 0; i < g.s_nodes.size(); ++i) {
        for (std::size_t j = 0; j < g.x_nodes.size(); ++j) {
            out << (j ? " " : "") << g.at(i, j);
        }
        out << '\n';
    }
}

/// Samples f on a uniform node grid.
inline GridData sample_grid(const Surface2D& f, const Rect& r, std::size_t s_count, std::size_t x_count) {
    GridData g{detail::uniform_nodes(s_count, r.s_lo, r.s_hi), detail::uniform_nodes(x_count, r.x_lo, r.x_hi), {}};
    g.values.reserve(s_count * x_count);
    for (double s : g.s_nodes) {
        for (double x : g.x_nodes) g.values.push_back(f.eval(s, x));
    }
    return g;
}

}  // namespace itolt
