#include "despeckle/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace despeckle {

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + (stream + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double standard_normal(Rng& rng) {
    for (;;) {
        const double u = 2.0 * uniform01(rng) - 1.0;
        const double v = 2.0 * uniform01(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

double gamma_deviate(double shape, Rng& rng) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw std::domain_error("gamma_deviate: shape must be positive and finite");
    }
    if (shape < 1.0) {
        // X_a = X_{a+1} * U^{1/a}; 1 - uniform01 keeps U strictly positive.
        const double u = 1.0 - uniform01(rng);
        return gamma_deviate(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z;
        double v;
        do {
            z = standard_normal(rng);
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - uniform01(rng);
        if (u < 1.0 - 0.0331 * z * z * z * z) {
            return d * v;
        }
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

}  // namespace despeckle
