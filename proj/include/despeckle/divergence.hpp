#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "despeckle/gamma_model.hpp"

namespace despeckle {

/// Raised when numerical integration fails to reach its tolerance.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A divergence between densities built from an outer transform h and an
/// inner convex function phi:  D(f1 || f2) = h( integral phi(f1/f2) f2 ).
///
/// `phi_weighted` receives the two log densities and must return
/// phi(f1/f2) * f2 computed in a form that stays finite deep in the tails
/// (work with the logs, not the raw ratio).  `scale` is 1 / (h'(0) phi''(1)),
/// the constant that turns the symmetrized divergence into an asymptotically
/// chi-square test statistic.
struct DivergenceSpec {
    std::string name;
    double scale = 1.0;
    std::function<double(double)> h;
    std::function<double(double, double)> phi_weighted;
};

/// Kullback-Leibler instance (h = identity, phi = t ln t, scale 1).
const DivergenceSpec& kullback_leibler_spec();

/// D(f1 || f2) by adaptive quadrature over (0, c), where the cut c is grown
/// until both densities are negligible.  Throws NumericError when the
/// quadrature does not converge.
double generic_divergence(const DivergenceSpec& spec,
                          const GammaParams& p1, const GammaParams& p2);

/// Symmetrized distance (D(f1||f2) + D(f2||f1)) / 2.
double symmetrized_distance(const DivergenceSpec& spec,
                            const GammaParams& p1, const GammaParams& p2);

/// Test statistic 2 m n scale / (m + n) times the symmetrized distance,
/// evaluated through the quadrature path.
double scaled_test_statistic(const DivergenceSpec& spec,
                             const GammaParams& p1, std::size_t m,
                             const GammaParams& p2, std::size_t n);

/// Closed form of the Kullback-Leibler test statistic for two gamma laws with
/// a common shape: m n (L1 + L2) / (m + n) * ((u1^2 + u2^2) / (2 u1 u2) - 1)
/// with u the estimated means.  Asymptotically chi-square under equality.
double kl_statistic(const GammaParams& p1, std::size_t m,
                    const GammaParams& p2, std::size_t n);

/// Upper tail probability of the chi-square law with `dof` degrees of freedom.
double chi2_survival(double statistic, int dof);

/// Statistic value whose upper tail probability equals `alpha`.
double chi2_critical_value(double alpha, int dof);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 1;
};

/// Same-distribution test between two samples: estimate both parameter pairs,
/// form the Kullback-Leibler statistic and convert to a p-value.
TestResult test_equal_distributions(std::span<const double> first,
                                    std::span<const double> second,
                                    int dof = 1,
                                    std::optional<double> fallback_looks = std::nullopt);

/// Soft acceptance weight from a p-value: 1 at or above `threshold`, 0 at or
/// below threshold / 2, linear in between.
double weight(double p_value, double threshold);

}  // namespace despeckle
