#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qho {

// Seedable, stream-splittable random source.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
// Streams: the engine is seeded through std::seed_seq over the 32-bit halves of
// (seed, stream), also fully specified by the standard, so (seed, stream) pairs
// give reproducible independent streams on every conforming platform.
// Uniforms take the top 53 bits of one engine output; normals use Box-Muller
// with the second variate cached. No rejection loops.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1].
    double uniform_open_zero() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform_open_zero()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qho
