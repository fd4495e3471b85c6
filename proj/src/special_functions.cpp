#include "despeckle/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace despeckle {
namespace {

// Asymptotic expansion of psi(x) for large x:
//   psi(x) ~ ln x - 1/(2x) - sum_k B_{2k} / (2k x^{2k}).
// With the recurrence pushing x above 6 the truncation error of seven terms
// is below 2e-13, which is plenty for the estimator and test statistics here.
constexpr double kDigammaShiftThreshold = 6.0;

double digamma_asymptotic(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series =
        inv2 * (1.0 / 12.0 -
        inv2 * (1.0 / 120.0 -
        inv2 * (1.0 / 252.0 -
        inv2 * (1.0 / 240.0 -
        inv2 * (1.0 / 132.0 -
        inv2 * (691.0 / 32760.0 -
        inv2 * (1.0 / 12.0)))))));
    return std::log(x) - 0.5 * inv - series;
}

constexpr int kIncompleteGammaMaxIter = 500;
constexpr double kIncompleteGammaEps = 1e-16;

// Series expansion of P(a, x), effective for x < a + 1.
double lower_gamma_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < kIncompleteGammaMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kIncompleteGammaEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("lower_regularized_gamma: series did not converge");
}

// Modified Lentz continued fraction for Q(a, x), effective for x >= a + 1.
double upper_gamma_continued_fraction(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kIncompleteGammaMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kIncompleteGammaEps) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("upper_regularized_gamma: continued fraction did not converge");
}

void check_incomplete_gamma_args(double a, double x) {
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::domain_error("incomplete gamma: shape must be positive and finite");
    }
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::domain_error("incomplete gamma: argument must be nonnegative and finite");
    }
}

}  // namespace

double digamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error("digamma: argument must be positive and finite");
    }
    // psi(x) = psi(x + 1) - 1/x lifts small arguments into the asymptotic range.
    double shift = 0.0;
    while (x < kDigammaShiftThreshold) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    return shift + digamma_asymptotic(x);
}

double lower_regularized_gamma(double a, double x) {
    check_incomplete_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return lower_gamma_series(a, x);
    return 1.0 - upper_gamma_continued_fraction(a, x);
}

double upper_regularized_gamma(double a, double x) {
    check_incomplete_gamma_args(a, x);
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - lower_gamma_series(a, x);
    return upper_gamma_continued_fraction(a, x);
}

}  // namespace despeckle
