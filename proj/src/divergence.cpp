#include "despeckle/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "despeckle/quadrature.hpp"
#include "despeckle/special_functions.hpp"

namespace despeckle {
namespace {

// Densities below this are treated as zero when choosing the integration cut.
const double kLogFloor = std::log(1e-300);

void check_comparable(const GammaParams& p1, const GammaParams& p2) {
    if (!valid_params(p1) || !valid_params(p2)) {
        throw std::domain_error("divergence: invalid gamma parameters");
    }
}

double upper_cut(const GammaParams& p1, const GammaParams& p2) {
    double c = std::max(p1.backscatter, p2.backscatter);
    while (log_gamma_density(c, p1) > kLogFloor || log_gamma_density(c, p2) > kLogFloor) {
        c *= 2.0;
    }
    return c;
}

// Panel edges for the quadrature, placed at multiples of each mean so the
// seed grid always resolves both density bulks.  A uniform grid over the full
// cut can put every sample where a concentrated density already underflows.
std::vector<double> density_panel_edges(const GammaParams& p1, const GammaParams& p2,
                                        double cut) {
    static const double kMultipliers[] = {
        1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.1,  0.2,  0.35, 0.5,  0.7,
        0.9,  1.1,  1.4,  1.8,  2.3,  3.0,  4.0,  5.5,  7.5,  10.0,
        14.0, 20.0, 30.0, 50.0, 80.0, 130.0, 210.0, 350.0, 560.0};
    std::vector<double> edges{0.0, cut};
    for (double mean : {p1.backscatter, p2.backscatter}) {
        for (double q : kMultipliers) {
            const double x = mean * q;
            if (x < cut) edges.push_back(x);
        }
    }
    std::sort(edges.begin(), edges.end());
    // Drop near-coincident edges; degenerate panels add nothing.
    std::vector<double> kept;
    kept.reserve(edges.size());
    for (double x : edges) {
        if (kept.empty() || x - kept.back() > 1e-12 * cut) kept.push_back(x);
    }
    if (kept.back() != cut) kept.back() = cut;
    return kept;
}

}  // namespace

const DivergenceSpec& kullback_leibler_spec() {
    static const DivergenceSpec spec{
        "kullback-leibler",
        1.0,
        [](double y) { return y; },
        [](double lf1, double lf2) {
            // phi(t) = t ln t weighted by f2 collapses to f1 (lf1 - lf2).
            if (lf1 < kLogFloor && lf2 < kLogFloor) return 0.0;
            return std::exp(lf1) * (lf1 - lf2);
        }};
    return spec;
}

double generic_divergence(const DivergenceSpec& spec,
                          const GammaParams& p1, const GammaParams& p2) {
    check_comparable(p1, p2);
    const double cut = upper_cut(p1, p2);
    const auto integrand = [&](double z) {
        if (!(z > 0.0)) return 0.0;
        return spec.phi_weighted(log_gamma_density(z, p1), log_gamma_density(z, p2));
    };
    const std::vector<double> edges = density_panel_edges(p1, p2, cut);
    const QuadratureResult q = integrate_adaptive(integrand, edges, 1e-10, 1e-13);
    if (!q.converged) {
        std::ostringstream msg;
        msg << "generic_divergence(" << spec.name << "): quadrature did not converge"
            << " (value " << q.value << ", error " << q.error_estimate
            << ", evaluations " << q.evaluations << ")";
        throw NumericError(msg.str());
    }
    // Tiny negative integrals are quadrature noise around zero.
    return spec.h(std::max(q.value, 0.0));
}

double symmetrized_distance(const DivergenceSpec& spec,
                            const GammaParams& p1, const GammaParams& p2) {
    return 0.5 * (generic_divergence(spec, p1, p2) + generic_divergence(spec, p2, p1));
}

double scaled_test_statistic(const DivergenceSpec& spec,
                             const GammaParams& p1, std::size_t m,
                             const GammaParams& p2, std::size_t n) {
    if (m == 0 || n == 0) {
        throw std::invalid_argument("scaled_test_statistic: sample sizes must be positive");
    }
    const double dm = static_cast<double>(m);
    const double dn = static_cast<double>(n);
    return 2.0 * dm * dn * spec.scale / (dm + dn) * symmetrized_distance(spec, p1, p2);
}

double kl_statistic(const GammaParams& p1, std::size_t m,
                    const GammaParams& p2, std::size_t n) {
    check_comparable(p1, p2);
    if (m == 0 || n == 0) {
        throw std::invalid_argument("kl_statistic: sample sizes must be positive");
    }
    const double dm = static_cast<double>(m);
    const double dn = static_cast<double>(n);
    const double u1 = p1.backscatter;
    const double u2 = p2.backscatter;
    const double spread = (u1 * u1 + u2 * u2) / (2.0 * u1 * u2) - 1.0;
    return std::max(0.0, dm * dn * (p1.looks + p2.looks) / (dm + dn) * spread);
}

double chi2_survival(double statistic, int dof) {
    if (dof < 1) {
        throw std::domain_error("chi2_survival: degrees of freedom must be at least 1");
    }
    if (!(statistic >= 0.0) || !std::isfinite(statistic)) {
        throw std::domain_error("chi2_survival: statistic must be nonnegative and finite");
    }
    return upper_regularized_gamma(0.5 * dof, 0.5 * statistic);
}

double chi2_critical_value(double alpha, int dof) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("chi2_critical_value: alpha must lie in (0, 1)");
    }
    double hi = 1.0;
    while (chi2_survival(hi, dof) > alpha) hi *= 2.0;
    double lo = 0.0;
    // chi2_survival decreases strictly, so bisection pins the quantile.
    for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_survival(mid, dof) > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

TestResult test_equal_distributions(std::span<const double> first,
                                    std::span<const double> second,
                                    int dof,
                                    std::optional<double> fallback_looks) {
    const GammaParams p1 = estimate_params(first, fallback_looks);
    const GammaParams p2 = estimate_params(second, fallback_looks);
    TestResult result;
    result.dof = dof;
    result.statistic = kl_statistic(p1, first.size(), p2, second.size());
    result.p_value = chi2_survival(result.statistic, dof);
    return result;
}

double weight(double p_value, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::domain_error("weight: threshold must lie in (0, 1)");
    }
    if (!(p_value >= 0.0 && p_value <= 1.0)) {
        throw std::domain_error("weight: p-value must lie in [0, 1]");
    }
    if (p_value >= threshold) return 1.0;
    if (p_value > 0.5 * threshold) return 2.0 / threshold * p_value - 1.0;
    return 0.0;
}

}  // namespace despeckle
