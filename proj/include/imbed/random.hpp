#pragma once

#include <cstdint>

#include "imbed/operator_core.hpp"

namespace imbed {

/// SplitMix64; the same seed gives the same stream on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Integer in [lo, hi].
    int integer(int lo, int hi) {
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    /// Uniform in the unit disc, by rejection from the square.
    Complex unit_disc() {
        for (;;) {
            const double x = uniform(-1.0, 1.0);
            const double y = uniform(-1.0, 1.0);
            if (x * x + y * y < 1.0) {
                return {x, y};
            }
        }
    }

    /// dim×dim matrix with entries scale·(uniform in the unit disc).
    Matrix disc_matrix(Index dim, double scale) {
        Matrix m(dim, dim);
        for (Index j = 0; j < dim; ++j) {
            for (Index i = 0; i < dim; ++i) {
                m(i, j) = scale * unit_disc();
            }
        }
        return m;
    }

private:
    std::uint64_t state_;
};

} // namespace imbed
