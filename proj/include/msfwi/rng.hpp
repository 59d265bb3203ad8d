#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace msfwi {

/// Deterministic random stream.  Uniform doubles come straight from the
/// mt19937_64 bit stream and normals from an explicit Box-Muller transform,
/// so sequences are reproducible bit-for-bit across platforms (the standard
/// pins the engine but not the library distributions).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return radius * std::cos(2.0 * M_PI * u2);
    }

    /// Circular complex Gaussian with unit variance (E|z|^2 = 1).
    std::complex<double> complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace msfwi
