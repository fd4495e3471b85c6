#pragma once

namespace despeckle {

/// Logarithmic derivative of the gamma function, psi(x) = d/dx ln Gamma(x).
/// Valid for x > 0; accurate to about 1e-13 absolute.  Throws std::domain_error
/// for nonpositive or non-finite arguments.
double digamma(double x);

/// Regularized lower incomplete gamma function P(a, x) for a > 0, x >= 0.
double lower_regularized_gamma(double a, double x);

/// Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x).
double upper_regularized_gamma(double a, double x);

}  // namespace despeckle
