#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace itolt {

/// Identifier recorded in every output that depends on random numbers.
inline constexpr std::string_view kRngId = "mt19937_64/seed_seq(seed,path)/box-muller-53bit";

/// Per-path normal stream.
///
/// Each (seed, path_index) pair owns an independent mt19937_64 engine keyed
/// through std::seed_seq, whose mixing algorithm is fixed by the standard.
/// Normals are produced by Box-Muller on 53-bit uniforms rather than
/// std::normal_distribution, whose algorithm is implementation-defined and
/// would break cross-toolchain reproducibility.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t path_index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(path_index),
                          static_cast<std::uint32_t>(path_index >> 32)};
        engine_.seed(seq);
    }

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0,1], u2 in [0,1)
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace itolt
