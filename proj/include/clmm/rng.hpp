// Seeded RNG with platform-independent uniform draws.
//
// std::uniform_real_distribution is implementation-defined, which would make
// golden files compiler-dependent, so uniforms are built from raw mt19937_64
// output instead.
#pragma once

#include <cstdint>
#include <random>

namespace clmm {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return engine_() % n;  // negligible bias at the sizes used here
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace clmm
