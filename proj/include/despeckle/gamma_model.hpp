#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "despeckle/rng.hpp"

namespace despeckle {

/// Parameters of the single-channel intensity speckle law: a gamma
/// distribution with shape `looks` and mean `backscatter` (rate looks /
/// backscatter).  The mean equals the backscatter regardless of looks.
struct GammaParams {
    double looks = 1.0;
    double backscatter = 1.0;
};

bool valid_params(const GammaParams& p);

using Sample = std::vector<double>;

/// Clamping interval applied to maximum likelihood and moment estimates of
/// the equivalent number of looks.
inline constexpr double kLooksMin = 1.0;
inline constexpr double kLooksMax = 100.0;

/// Search bracket for the likelihood root.  Outside this interval the sample
/// is treated as having no usable root.
inline constexpr double kLooksBracketLow = 0.1;
inline constexpr double kLooksBracketHigh = 200.0;

double log_gamma_density(double z, const GammaParams& p);
double gamma_density(double z, const GammaParams& p);

/// One-pass summary of a positive sample, sufficient for both the likelihood
/// and moment estimators.
struct SampleStats {
    double mean = 0.0;
    double mean_log = 0.0;
    double variance = 0.0;  // unbiased (n - 1); zero when count < 2
    std::size_t count = 0;
    bool all_equal = false;
};

SampleStats compute_sample_stats(std::span<const double> sample);

/// Root of ln L - psi(L) = s in [kLooksBracketLow, kLooksBracketHigh], found
/// by bisection to 1e-12.  The left side is strictly decreasing, so the root
/// is unique when the bracket endpoints straddle s; otherwise nullopt.
std::optional<double> looks_equation_root(double log_mean_ratio);

/// Maximum likelihood mean estimate (the sample mean).
double estimate_lambda(std::span<const double> sample);

/// Maximum likelihood looks estimate clamped to [kLooksMin, kLooksMax], or
/// nullopt when the likelihood equation has no root in the search bracket
/// (constant or near-constant samples).
std::optional<double> estimate_looks(std::span<const double> sample);

/// Joint estimate that never fails on a nonempty positive sample: the mean for
/// backscatter, and for looks the likelihood root, then `fallback_looks` when
/// provided, then the moment ratio mean^2 / variance, everything clamped to
/// [kLooksMin, kLooksMax].
GammaParams estimate_params(std::span<const double> sample,
                            std::optional<double> fallback_looks = std::nullopt);

/// Same policy as estimate_params but starting from precomputed statistics;
/// this is the hot path used by the filters.
GammaParams params_from_stats(const SampleStats& stats,
                              std::optional<double> fallback_looks = std::nullopt);

/// Draws `count` deviates from the speckle law.
Sample sample_gamma(const GammaParams& p, std::size_t count, Rng& rng);

}  // namespace despeckle
