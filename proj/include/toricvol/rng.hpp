#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace toricvol {

// Deterministic splittable RNG. Stream k of a master seed is an independent
// engine; the (seed, stream) -> sequence map is fixed by the standard's
// mt19937_64 + seed_seq, so results are reproducible across builds.
//
// Gaussians use an explicit Box-Muller transform rather than
// std::normal_distribution, whose output sequence is implementation-defined.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        eng_.seed(seq);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal, fixed Box-Muller sequence.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Complex Gaussian with independent N(0,1) real and imaginary parts.
    std::complex<double> cnormal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace toricvol
