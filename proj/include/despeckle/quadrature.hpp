#pragma once

#include <functional>
#include <span>

namespace despeckle {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
    long evaluations = 0;
};

/// Adaptive Simpson integration of f over [lo, hi] with Richardson
/// extrapolation of each accepted panel.  The interval is seeded with several
/// panels so that well-separated features are not missed by the first
/// bisection.  `converged` is false when the depth limit was hit anywhere.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double lo, double hi,
                                    double rel_tol = 1e-9,
                                    double abs_tol = 1e-12,
                                    int max_depth = 48);

/// Same integrator, but seeded with caller-provided panel edges (strictly
/// increasing, at least two).  Callers that know where the integrand lives
/// should place edges there; a uniform grid over a wide interval can sample
/// an entirely zero slice of a concentrated integrand and accept it.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    std::span<const double> panel_edges,
                                    double rel_tol = 1e-9,
                                    double abs_tol = 1e-12,
                                    int max_depth = 48);

}  // namespace despeckle
