#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace itolt::stats {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Unbiased sample standard deviation.
inline double stddev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// mean +- 1.96 standard errors
inline Interval normal_ci(std::span<const double> v) {
    const double m = mean(v);
    const double half = v.empty() ? 0.0 : 1.96 * stddev(v) / std::sqrt(static_cast<double>(v.size()));
    return {m - half, m + half};
}

/// Percentile bootstrap CI of the mean (95%). The resampling engine is
/// seeded from `seed`, so the interval is reproducible.
inline Interval bootstrap_ci(std::span<const double> v, int resamples = 1000,
                             std::uint64_t seed = 0x5eed) {
    if (v.empty()) return {};
    std::mt19937_64 eng(seed);
    std::vector<double> means(static_cast<std::size_t>(resamples));
    const auto n = v.size();
    for (auto& m : means) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[eng() % n];
        m = s / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    auto at = [&](double q) {
        const auto idx = static_cast<std::size_t>(q * static_cast<double>(resamples - 1));
        return means[idx];
    };
    return {at(0.025), at(0.975)};
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("loglog_slope: need >= 2 paired points");
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double mx = mean(lx), my = mean(ly);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace itolt::stats
