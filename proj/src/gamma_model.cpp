#include "despeckle/gamma_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "despeckle/special_functions.hpp"

namespace despeckle {
namespace {

void check_params(const GammaParams& p) {
    if (!valid_params(p)) {
        throw std::domain_error("gamma model: looks and backscatter must be positive and finite");
    }
}

double clamp_looks(double looks) {
    return std::clamp(looks, kLooksMin, kLooksMax);
}

// ln L - psi(L), the dispersion side of the likelihood equation.
double looks_equation_lhs(double looks) {
    return std::log(looks) - digamma(looks);
}

}  // namespace

bool valid_params(const GammaParams& p) {
    return p.looks > 0.0 && p.backscatter > 0.0 &&
           std::isfinite(p.looks) && std::isfinite(p.backscatter);
}

double log_gamma_density(double z, const GammaParams& p) {
    check_params(p);
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw std::domain_error("log_gamma_density: argument must be positive and finite");
    }
    const double rate = p.looks / p.backscatter;
    return p.looks * std::log(rate) - std::lgamma(p.looks) +
           (p.looks - 1.0) * std::log(z) - rate * z;
}

double gamma_density(double z, const GammaParams& p) {
    return std::exp(log_gamma_density(z, p));
}

SampleStats compute_sample_stats(std::span<const double> sample) {
    if (sample.empty()) {
        throw std::invalid_argument("compute_sample_stats: empty sample");
    }
    SampleStats stats;
    stats.count = sample.size();
    stats.all_equal = true;
    const double first = sample.front();
    double sum = 0.0;
    double sum_log = 0.0;
    for (double z : sample) {
        if (!(z > 0.0) || !std::isfinite(z)) {
            throw std::domain_error("compute_sample_stats: sample values must be positive and finite");
        }
        if (z != first) stats.all_equal = false;
        sum += z;
        sum_log += std::log(z);
    }
    const double n = static_cast<double>(stats.count);
    stats.mean = stats.all_equal ? first : sum / n;
    stats.mean_log = sum_log / n;
    if (stats.count >= 2 && !stats.all_equal) {
        double ss = 0.0;
        for (double z : sample) {
            const double d = z - stats.mean;
            ss += d * d;
        }
        stats.variance = ss / (n - 1.0);
    }
    return stats;
}

std::optional<double> looks_equation_root(double log_mean_ratio) {
    if (!std::isfinite(log_mean_ratio)) return std::nullopt;
    double lo = kLooksBracketLow;
    double hi = kLooksBracketHigh;
    const double f_lo = looks_equation_lhs(lo) - log_mean_ratio;
    const double f_hi = looks_equation_lhs(hi) - log_mean_ratio;
    if (f_lo < 0.0 || f_hi > 0.0) {
        // Monotone decreasing left side, so no sign change means no root.
        return std::nullopt;
    }
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (looks_equation_lhs(mid) - log_mean_ratio >= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double estimate_lambda(std::span<const double> sample) {
    return compute_sample_stats(sample).mean;
}

std::optional<double> estimate_looks(std::span<const double> sample) {
    const SampleStats stats = compute_sample_stats(sample);
    const auto root = looks_equation_root(std::log(stats.mean) - stats.mean_log);
    if (!root) return std::nullopt;
    return clamp_looks(*root);
}

GammaParams estimate_params(std::span<const double> sample,
                            std::optional<double> fallback_looks) {
    return params_from_stats(compute_sample_stats(sample), fallback_looks);
}

GammaParams params_from_stats(const SampleStats& stats,
                              std::optional<double> fallback_looks) {
    GammaParams p;
    p.backscatter = stats.mean;
    const auto root = looks_equation_root(std::log(stats.mean) - stats.mean_log);
    if (root) {
        p.looks = clamp_looks(*root);
    } else if (fallback_looks) {
        p.looks = clamp_looks(*fallback_looks);
    } else if (stats.variance > 0.0) {
        p.looks = clamp_looks(stats.mean * stats.mean / stats.variance);
    } else {
        // Constant sample and nothing else to go on: treat as noise free.
        p.looks = kLooksMax;
    }
    return p;
}

Sample sample_gamma(const GammaParams& p, std::size_t count, Rng& rng) {
    check_params(p);
    Sample out(count);
    const double scale = p.backscatter / p.looks;
    for (double& z : out) {
        z = scale * gamma_deviate(p.looks, rng);
    }
    return out;
}

}  // namespace despeckle
