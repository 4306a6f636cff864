#pragma once

#include <cstdint>
#include <random>

namespace sapgm {

// mt19937_64 output is specified by the standard; the distributions are not,
// so uniform draws are derived by hand to keep seeded runs portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace sapgm
