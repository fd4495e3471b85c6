#pragma once

#include <cstdint>
#include <random>

namespace despeckle {

/// All stochastic code draws from a shared engine type so that a seed pins the
/// byte-exact output everywhere.  The variate transforms below are hand rolled
/// because the std::*_distribution classes are free to differ between standard
/// library implementations.
using Rng = std::mt19937_64;

/// splitmix64 step, used to derive independent per-stream seeds from a master
/// seed without correlated low bits.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal deviate via the Marsaglia polar method.
double standard_normal(Rng& rng);

/// Gamma deviate with unit scale via the Marsaglia-Tsang squeeze method.
/// Shapes below one are handled with the boost X_{a+1} * U^{1/a}.
double gamma_deviate(double shape, Rng& rng);

}  // namespace despeckle
